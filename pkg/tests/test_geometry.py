import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qheat.errors import InvalidConfig
from qheat.geometry import (
    DipoleConfig,
    build_collective_basis,
    coupled_projector,
    dark_projector,
    decompose_domains,
    random_config,
    validate_config,
)


def polar(alphas, p):
    p = np.asarray(p, dtype=float)
    return DipoleConfig.from_polar(alphas, p, np.zeros_like(p))


def test_three_level_parallel_is_valid():
    assert validate_config(DipoleConfig.three_level(1.0, 1.0, 0.0)).ok


def test_alpha_above_one_rejected():
    rep = validate_config(DipoleConfig.three_level(1.2, 0.5, 0.0))
    assert not rep.ok
    assert any("alphas" in f for f in rep.failures)


def test_first_alpha_must_be_one():
    cfg = DipoleConfig(3, [0.9, 1.0], np.eye(2))
    assert not validate_config(cfg).ok


def test_non_psd_alignment_rejected():
    m = np.array([[1, 1, 0], [1, 1, 1], [0, 1, 1]], dtype=complex)
    cfg = DipoleConfig(4, [1, 1, 1], m)
    rep = validate_config(cfg)
    assert any("positive semidefinite" in f or "transitive" in f for f in rep.failures)


def test_rank_above_three_rejected():
    cfg = DipoleConfig(5, [1, 1, 1, 1], np.eye(4))
    rep = validate_config(cfg)
    assert any("rank 4" in f for f in rep.failures)


def test_non_hermitian_rejected():
    m = np.array([[1, 0.5], [0.2, 1]], dtype=complex)
    assert not validate_config(DipoleConfig(3, [1, 1], m)).ok


def test_phase_additivity_rejected():
    ph = np.array([[0, 0.3, 0.3], [-0.3, 0, 0.3], [-0.3, -0.3, 0]])
    cfg = DipoleConfig.from_polar([1, 1, 1], np.ones((3, 3)), ph)
    rep = validate_config(cfg)
    assert any("additive" in f for f in rep.failures)


def test_from_vectors_gram_and_alphas():
    d = np.array([[2, 0, 0], [0, 1, 0], [1, 1j, 0]], dtype=complex)
    cfg = DipoleConfig.from_vectors(d)
    assert np.allclose(cfg.alphas, [1, 0.5, np.sqrt(2) / 2])
    assert np.isclose(cfg.alignment[1, 2], 1j / np.sqrt(2))
    assert validate_config(cfg).ok


def test_decompose_three_level_parallel():
    dec = decompose_domains(DipoleConfig.three_level(1.0, 1.0, 0.0))
    assert dec.domains == ((0, 1),)
    assert dec.lone == ()
    assert dec.n_eff == 2
    assert np.isclose(dec.couplings[0], np.sqrt(2))


def test_decompose_all_parallel_ten_levels():
    cfg = polar(np.ones(9), np.ones((9, 9)))
    dec = decompose_domains(cfg)
    assert dec.p == 1 and dec.n_parallel == 9 and dec.n_eff == 2


def test_decompose_mixed_groups():
    # dipoles 1,2 parallel; 3 alone
    m = np.array([[1, 1, 0], [1, 1, 0], [0, 0, 1]], dtype=float)
    dec = decompose_domains(polar([1, 0.5, 0.8], m))
    assert dec.domains == ((0, 1),)
    assert dec.lone == (2,)
    assert dec.n_eff == 3
    assert np.allclose(dec.couplings, [np.sqrt(1.25), 0.8])


def test_decompose_rejects_invalid():
    with pytest.raises(InvalidConfig):
        decompose_domains(DipoleConfig(5, [1, 1, 1, 1], np.eye(4)))


def test_bright_and_dark_for_parallel_pair():
    cfg = DipoleConfig.three_level(1.0, 1.0, 0.0)
    basis = build_collective_basis(decompose_domains(cfg), cfg)
    bright = basis.column(basis.bright_indices[0])
    dark = basis.column(basis.dark_indices[0])
    assert np.allclose(np.abs(bright), [0, 1 / np.sqrt(2), 1 / np.sqrt(2)])
    assert abs(np.vdot(bright, dark)) < 1e-14
    # the dark state is annihilated by the collective lowering operator
    k = cfg.coupling_matrix()
    assert np.allclose(k @ dark[1:].conj(), 0)


def test_nonparallel_basis_has_no_dark_states():
    cfg = DipoleConfig.three_level(0.6, 0.7, 0.4)
    basis = build_collective_basis(decompose_domains(cfg), cfg)
    assert basis.dark_indices == ()
    assert basis.hidden_dark.shape[1] == 0
    assert basis.n_thermal == 3


def test_hidden_dark_for_four_independent_directions():
    rng = np.random.default_rng(3)
    cfg = random_config(5, rng)
    dec = decompose_domains(cfg)
    basis = build_collective_basis(dec, cfg)
    assert dec.n_eff == 5
    # four dipoles in three dimensions: one combination decouples
    assert basis.hidden_dark.shape[1] == 1
    assert basis.n_thermal == 4


def test_projectors_partition_excited_space():
    rng = np.random.default_rng(7)
    cfg = random_config(6, rng, n_parallel_groups=2)
    basis = build_collective_basis(decompose_domains(cfg), cfg)
    pd, pc = dark_projector(basis), coupled_projector(basis)
    exc = np.eye(6)
    exc[0, 0] = 0
    assert np.allclose(pd + pc, exc, atol=1e-12)
    assert np.allclose(pd @ pc, 0, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 7), seed=st.integers(0, 2**32 - 1), grouped=st.booleans())
def test_random_configs_valid_and_basis_unitary(n, seed, grouped):
    rng = np.random.default_rng(seed)
    groups = int(rng.integers(1, n)) if grouped else None
    cfg = random_config(n, rng, groups)
    assert validate_config(cfg).ok
    dec = decompose_domains(cfg)
    assert dec.n_eff == dec.p + n - dec.n_parallel
    basis = build_collective_basis(dec, cfg)
    u = basis.matrix
    assert np.allclose(u.conj().T @ u, np.eye(n), atol=1e-12)
    # every dark state is decoupled from the bath
    k = cfg.coupling_matrix()
    pd = dark_projector(basis)
    ev, vecs = np.linalg.eigh(pd)
    for v in vecs[:, ev > 0.5].T:
        assert np.linalg.norm(k @ v[1:].conj()) < 1e-9
    # coupled count equals the rank of the coupling matrix
    assert basis.n_coupled == np.linalg.matrix_rank(k, tol=1e-9)
