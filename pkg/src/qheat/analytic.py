"""Closed-form steady states and optimal initial states.

These never touch a generator; they are the oracles the numerical dynamics
is checked against.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    CollectiveBasis,
    DipoleConfig,
    DomainDecomposition,
    build_collective_basis,
    coupled_projector,
    dark_projector,
    decompose_domains,
)
from .liouville import ThreeLevelParams
from .dynamics import integral_of_motion


@dataclass
class SteadyStateReport:
    state: np.ndarray
    state_collective: np.ndarray
    diagonal_basis: np.ndarray
    populations: np.ndarray
    capability: float
    boltzmann: float

    @property
    def darkness(self) -> float:
        return 1.0 - self.capability


def steady_three_level(params: ThreeLevelParams, rho0) -> np.ndarray:
    """Three-level steady state for one bath, branching on aligned vs misaligned dipoles."""
    a, phi, e = params.alpha, params.phi, params.boltzmann
    rho = np.zeros((3, 3), dtype=complex)
    if params.p >= 1 - 1e-9:
        inv = integral_of_motion(params.config(), np.asarray(rho0))
        ebw = 1 / e
        rho21 = a * np.exp(1j * phi) / (1 + a**2) * (1 - inv * (2 + ebw)) / (1 + ebw)
        rho00 = (1 - inv) / (1 + e)
        rho22 = (a**2 + inv * (1 - a**2 + ebw)) / ((1 + a**2) * (1 + ebw))
    else:
        rho21 = 0.0
        rho00 = 1 / (1 + 2 * e)
        rho22 = e / (1 + 2 * e)
    rho[0, 0] = rho00
    rho[2, 2] = rho22
    rho[1, 1] = 1 - rho00 - rho22
    rho[2, 1] = rho21
    rho[1, 2] = np.conj(rho21)
    return rho


def steady_general(cfg: DipoleConfig, dec: DomainDecomposition | None, basis: CollectiveBasis | None, boltzmann: float, rho0) -> SteadyStateReport:
    """Partially thermalized steady state: ground and coupled states Gibbs-like at
    ``boltzmann``, scaled by the thermalization capability; dark block frozen."""
    if dec is None:
        dec = decompose_domains(cfg)
    if basis is None:
        basis = build_collective_basis(dec, cfg)
    rho0 = np.asarray(rho0, dtype=complex)
    n = cfg.n_levels
    pd = dark_projector(basis)
    pc = coupled_projector(basis)
    dark_weight = float(np.real(np.trace(pd @ rho0)))
    capability = 1.0 - dark_weight
    rho00 = capability / (1 + basis.n_coupled * boltzmann)

    rho = np.zeros((n, n), dtype=complex)
    rho[0, 0] = rho00
    rho += boltzmann * rho00 * pc
    rho += pd @ rho0 @ pd
    rho = 0.5 * (rho + rho.conj().T)

    u = basis.matrix
    collective = u.conj().T @ rho @ u

    # diagonal representation: keep the collective columns for coupled states and
    # rotate the dark block onto the eigenvectors of rho_d(0)
    diag_basis = _diagonalizing_basis(basis, rho0)
    pops = np.real(np.einsum("ij,ik,kj->j", diag_basis.conj(), rho, diag_basis))
    return SteadyStateReport(rho, collective, diag_basis, pops, capability, boltzmann)


def _diagonalizing_basis(basis: CollectiveBasis, rho0) -> np.ndarray:
    n = basis.dim
    coupled = basis.matrix[:, [0, *basis.bright_indices, *basis.lone_indices]]
    hidden = basis.hidden_dark
    if hidden.shape[1]:
        # the coupled block must avoid the decoupled directions inside the bright/lone span
        pc = coupled[:, 1:] @ coupled[:, 1:].conj().T - hidden @ hidden.conj().T
        ev, vecs = np.linalg.eigh(pc)
        coupled = np.column_stack([basis.matrix[:, 0], vecs[:, ev > 0.5]])
    dark = basis.matrix[:, list(basis.dark_indices)]
    if hidden.shape[1]:
        dark = np.column_stack([dark, hidden])
    if dark.shape[1]:
        block = dark.conj().T @ rho0 @ dark
        ev, vecs = np.linalg.eigh(0.5 * (block + block.conj().T))
        # ties broken by descending eigenvalue then lowest index
        order = np.argsort(-np.round(ev, 12), kind="stable")
        dark_cols = dark @ vecs[:, order]
    else:
        dark_cols = np.zeros((n, 0), dtype=complex)
    out = np.column_stack([coupled, dark_cols])
    assert out.shape == (n, n)
    return out


def steady_dicke(n_atoms: int, boltzmann: float, darkness: float = 0.0) -> np.ndarray:
    """Ladder populations rho_jj, j = 0..N, of the partially thermalized Dicke state."""
    weights = boltzmann ** np.arange(n_atoms + 1)
    return (1.0 - darkness) * weights / weights.sum()


def optimal_initial_state(cfg: DipoleConfig, rho00: float) -> np.ndarray:
    """Three-level state with fixed ground population and no dark-state overlap."""
    if cfg.n_levels != 3:
        raise ValueError("optimal_initial_state is defined for three-level systems")
    if not 0.0 <= rho00 <= 1.0:
        raise ValueError("rho00 must lie in [0, 1]")
    a = float(cfg.alphas[1])
    phi = float(np.angle(cfg.alignment[0, 1]))
    exc = 1.0 - rho00
    rho = np.zeros((3, 3), dtype=complex)
    rho[0, 0] = rho00
    rho[1, 1] = exc / (1 + a**2)
    rho[2, 2] = a**2 * exc / (1 + a**2)
    rho[2, 1] = a * np.exp(1j * phi) * exc / (1 + a**2)
    rho[1, 2] = np.conj(rho[2, 1])
    return rho


def gibbs_populations(n_levels: int, boltzmann: float) -> np.ndarray:
    """Degenerate-excited Gibbs populations (ground first)."""
    pops = np.full(n_levels, boltzmann)
    pops[0] = 1.0
    return pops / pops.sum()
