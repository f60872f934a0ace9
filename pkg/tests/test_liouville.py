import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from qheat.baths import BathSpec, ModulationSpec, response
from qheat.dynamics import steady_state
from qheat.geometry import DipoleConfig, random_config
from qheat.liouville import (
    ThreeLevelODE,
    ThreeLevelParams,
    build_dicke_liouvillian,
    build_dicke_sub_liouvillian,
    build_sub_liouvillian,
    build_total_liouvillian,
    det_A,
    detuned_matrix,
    dissipator,
    kossakowski_blocks,
    ladder_operator,
    unvec,
    vec,
)

from conftest import HALF_T, ground, random_density, split_baths


def random_hermitian(n, rng):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return z + z.conj().T


def test_vec_is_column_stacking(rng):
    a, x, b = (rng.normal(size=(3, 3)) for _ in range(3))
    assert np.allclose(np.kron(b.T, a) @ vec(x), vec(a @ x @ b))
    assert np.allclose(unvec(vec(x), 3), x)


def test_dissipator_matches_definition(rng):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = random_density(3, rng)
    direct = 2 * a @ rho @ b - b @ a @ rho - rho @ b @ a
    assert np.allclose(unvec(dissipator(a, b) @ vec(rho), 3), direct)


def test_tls_generator_null_state_is_gibbs():
    bath = BathSpec("b", 0.8)
    gen = build_total_liouvillian(DipoleConfig(2, [1.0], [[1.0]]), [bath], ModulationSpec.none(), 1.0)
    rho = steady_state(gen)
    assert rho[1, 1].real / rho[0, 0].real == pytest.approx(math.exp(-1 / 0.8), rel=1e-10)


def test_unaligned_generator_is_sum_of_independent_channels():
    bath = BathSpec("b", 1.0)
    mod = ModulationSpec.none()
    cfg = DipoleConfig.three_level(0.6, 0.0, 0.0)
    gen = build_total_liouvillian(cfg, [bath], mod, 1.0).matrix
    g_down, g_up = 0.5 * response(bath, 1.0), 0.5 * response(bath, -1.0)
    expected = np.zeros_like(gen)
    for j, a2 in ((1, 1.0), (2, 0.36)):
        low = np.zeros((3, 3))
        low[0, j] = 1.0
        expected += a2 * (g_down * dissipator(low, low.T) + g_up * dissipator(low.T, low))
    assert np.allclose(gen, expected, atol=1e-14)


def test_parallel_kossakowski_eigenvalues():
    bath = BathSpec("b", HALF_T)
    down, _ = kossakowski_blocks(DipoleConfig.three_level(1.0, 1.0, 0.0), bath, ModulationSpec.none(), 0, 1.0)
    # (G/2) [[1,1],[1,1]] with G = 2
    assert np.allclose(np.linalg.eigvalsh(down), [0.0, 2.0], atol=1e-14)


def test_disjoint_sidebands_give_two_terms():
    cold, hot = split_baths()
    mod = ModulationSpec.two_sideband(0.25)
    cfg = DipoleConfig.three_level(0.8, 0.5, 0.3)
    terms = [build_sub_liouvillian(cfg, b, mod, q, 1.0) for q in (-1, 1) for b in (cold, hot)]
    nonzero = [t for t in terms if np.any(t.matrix)]
    assert len(nonzero) == 2
    total = build_total_liouvillian(cfg, (cold, hot), mod, 1.0)
    assert np.allclose(total.matrix, nonzero[0].matrix + nonzero[1].matrix)


def test_decoupled_generator_is_zero():
    bath = BathSpec("b", 1.0, band=(3.0, 4.0))
    gen = build_total_liouvillian(DipoleConfig.three_level(), [bath], ModulationSpec.none(), 1.0)
    assert not np.any(gen.matrix)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 6), seed=st.integers(0, 2**32 - 1))
def test_generator_preserves_trace_hermiticity_and_cp(n, seed):
    rng = np.random.default_rng(seed)
    cfg = random_config(n, rng)
    baths = (BathSpec("c", rng.uniform(0.2, 2), band=(0, 1)), BathSpec("h", rng.uniform(0.5, 4), band=(1, math.inf)))
    mod = ModulationSpec.two_sideband(rng.uniform(0.05, 0.9))
    gen = build_total_liouvillian(cfg, baths, mod, 1.0)
    for _ in range(5):
        x = random_hermitian(n, rng)
        out = gen.apply(x)
        assert abs(np.trace(out)) < 1e-12 * max(1.0, np.abs(out).max())
        assert np.allclose(out, out.conj().T, atol=1e-12)
    for b in baths:
        for q in mod.window():
            for blk in kossakowski_blocks(cfg, b, mod, q, 1.0):
                assert np.linalg.eigvalsh(0.5 * (blk + blk.conj().T))[0] > -1e-12


def _fig2():
    return ThreeLevelParams(alpha=1.0, p=1.0, phi=0.0, G=2.0, boltzmann=0.5)


def test_three_level_b_vector():
    ode = ThreeLevelODE(_fig2())
    assert np.allclose(ode.b(), [-1, -1, 2, 0])


@settings(max_examples=30, deadline=None)
@given(
    alpha=st.floats(0.1, 1.0),
    p=st.floats(0.0, 1.0),
    phi=st.floats(-math.pi, math.pi),
    e=st.floats(0.01, 0.99),
)
def test_ode_matches_superoperator(alpha, p, phi, e):
    # single bath with G(w0) = 2 and Boltzmann factor e
    temp = -1 / math.log(e)
    gamma0 = 2 * (1 - e)
    bath = BathSpec("b", temp, gamma0=gamma0)
    params = ThreeLevelParams(alpha, p, phi, G=2.0, boltzmann=e)
    gen = build_total_liouvillian(params.config(), [bath], ModulationSpec.none(), 1.0)
    ode = ThreeLevelODE(params)
    rng = np.random.default_rng(0)
    rho = random_density(3, rng)
    drho = gen.apply(rho)
    x, y = ode.split(rho)
    dx, dy = ode.rhs(0.0, x, y)
    ex, ey = ode.split(drho)
    assert np.allclose(dx, ex, atol=1e-12)
    assert np.allclose(dy, ey, atol=1e-12)
    assert np.linalg.eigvals(ode.B()).real.max() < 0


def test_ode_trajectory_matches_superoperator_flow():
    params = ThreeLevelParams(0.7, 0.9, 0.4, G=2.0, boltzmann=0.3)
    bath = BathSpec("b", -1 / math.log(0.3), gamma0=2 * 0.7)
    gen = build_total_liouvillian(params.config(), [bath], ModulationSpec.none(), 1.0)
    rho0 = random_density(3, np.random.default_rng(5))
    ode = ThreeLevelODE(params)
    x0, y0 = ode.split(rho0)
    for t in (0.5, 2.0, 10.0):
        rho_t = unvec(expm(gen.matrix * t) @ vec(rho0), 3)
        bigA = np.zeros((5, 5), dtype=complex)
        bigA[:4, :4] = ode.A()
        bigA[:4, 4] = ode.b()
        x_t = (expm(bigA * t) @ np.append(x0, 1.0))[:4]
        y_t = expm(ode.B() * t) @ y0
        ex, ey = ode.split(rho_t)
        assert np.allclose(x_t, ex, atol=1e-10)
        assert np.allclose(y_t, ey, atol=1e-10)


def test_det_examples():
    assert det_A(ThreeLevelParams(1.0, 1.0, 0.0, 2.0, 0.5)) == 0.0
    assert det_A(ThreeLevelParams(1.0, 0.0, 0.0, 2.0, 0.5)) == pytest.approx(32.0)
    assert det_A(ThreeLevelParams(1.0, 1.0, 0.0, 2.0, 0.5, detuning=0.3)) > 0
    p_vals = np.linspace(0, 1, 11)
    dets = [det_A(ThreeLevelParams(0.8, p, 0.2, 2.0, 0.4)) for p in p_vals]
    assert np.argmax(dets) == 0


@settings(max_examples=100, deadline=None)
@given(
    alpha=st.floats(0.05, 1.0),
    p=st.floats(0.0, 1.0),
    phi=st.floats(-math.pi, math.pi),
    g=st.floats(0.1, 10.0),
    e=st.floats(0.0, 1.0),
    dlt=st.floats(-5.0, 5.0),
)
def test_det_formula_matches_numeric(alpha, p, phi, g, e, dlt):
    params = ThreeLevelParams(alpha, p, phi, g, e, dlt)
    num = np.linalg.det(detuned_matrix(params)).real
    ref = det_A(params)
    assert abs(num - ref) <= 1e-9 * max(abs(ref), (0.5 * g) ** 4 * 1e-3)


def test_dicke_single_atom_is_tls():
    bath = BathSpec("b", 0.9)
    mod = ModulationSpec.none()
    tls = build_total_liouvillian(DipoleConfig(2, [1.0], [[1.0]]), [bath], mod, 1.0)
    for ladder in ("uniform", "collective"):
        dk = build_dicke_liouvillian(1, [bath], mod, 1.0, ladder=ladder)
        assert np.allclose(dk.matrix, tls.matrix)


def test_collective_ladder_rates():
    # near-zero temperature: pure decay with G = gamma
    bath = BathSpec("b", 0.01)
    gen = build_dicke_sub_liouvillian(3, bath, ModulationSpec.none(), 0, 1.0, ladder="collective")
    rates = []
    for j in (1, 2, 3):
        rho = np.zeros((4, 4))
        rho[j, j] = 1.0
        rates.append(gen.apply(rho)[j - 1, j - 1].real)
    assert np.allclose(rates, [3.0, 4.0, 3.0], rtol=1e-12)


def test_dicke_zero_temperature_steady_state_is_ground():
    bath = BathSpec("b", 0.01)
    gen = build_dicke_liouvillian(4, bath, ModulationSpec.none(), 1.0)
    rho = steady_state(gen)
    assert rho[0, 0].real == pytest.approx(1.0, abs=1e-12)


def test_ladder_rejects_unknown_kind():
    with pytest.raises(ValueError):
        ladder_operator(3, "spin")
