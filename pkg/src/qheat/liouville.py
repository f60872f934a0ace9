"""Superoperator assembly for the sideband master equation.

Density matrices are vectorized by column stacking, ``vec(A X B) = (B^T kron A) vec(X)``.
The dissipator is ``D(a, b) rho = 2 a rho b - b a rho - rho b a``; no Hamiltonian or
Lamb-shift term is included (interaction picture).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .baths import BathSpec, ModulationSpec, response
from .geometry import DipoleConfig


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim, order="F")


@dataclass(frozen=True)
class Superoperator:
    dim: int
    matrix: np.ndarray = field(repr=False)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho), self.dim)

    def __add__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.dim, self.matrix + other.matrix)

    def __rmul__(self, c) -> "Superoperator":
        return Superoperator(self.dim, c * self.matrix)

    @classmethod
    def zero(cls, dim: int) -> "Superoperator":
        return cls(dim, np.zeros((dim * dim, dim * dim), dtype=complex))

    def to_csv_rows(self, tol: float = 0.0):
        """(row, col, re, im) for every entry above ``tol`` in modulus."""
        rows, cols = np.nonzero(np.abs(self.matrix) > tol)
        for r, c in zip(rows, cols):
            z = self.matrix[r, c]
            yield int(r), int(c), float(z.real), float(z.imag)


def dissipator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of D(a, b) acting on column-stacked vectors."""
    d = a.shape[0]
    eye = np.eye(d)
    ba = b @ a
    return 2 * np.kron(b.T, a) - np.kron(eye, ba) - np.kron(ba.T, eye)


def _ket_bra(n, i, j):
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1.0
    return m


def multilevel_channels(cfg: DipoleConfig):
    """Unit-rate emission and absorption superoperators of the V-type system.

    Emission sums ``K_jj' D(sigma_-^j, sigma_+^j')`` and absorption sums
    ``conj(K_jj') D(sigma_+^j, sigma_-^j')`` with ``K`` the coupling matrix.
    """
    return _channels_cached(cfg.n_levels, cfg.alphas.tobytes(), cfg.alignment.tobytes())


@lru_cache(maxsize=256)
def _channels_cached(n, alpha_bytes, align_bytes):
    k = n - 1
    alphas = np.frombuffer(alpha_bytes, dtype=float)
    m = np.frombuffer(align_bytes, dtype=complex).reshape(k, k)
    kmat = np.outer(alphas, alphas) * m
    emit = np.zeros((n * n, n * n), dtype=complex)
    absorb = np.zeros_like(emit)
    lower = [_ket_bra(n, 0, j + 1) for j in range(k)]
    raise_ = [_ket_bra(n, j + 1, 0) for j in range(k)]
    for j in range(k):
        for jp in range(k):
            c = kmat[j, jp]
            if c == 0:
                continue
            emit += c * dissipator(lower[j], raise_[jp])
            absorb += np.conj(c) * dissipator(raise_[j], lower[jp])
    emit.setflags(write=False)
    absorb.setflags(write=False)
    return emit, absorb


def sideband_prefactors(bath: BathSpec, mod: ModulationSpec, q: int, omega0: float):
    """(1/2) P(q) G(+w_q) and (1/2) P(q) G(-w_q) at sideband w_q = w0 + q Omega."""
    pq = mod.weights.get(q, 0.0)
    if pq == 0.0:
        return 0.0, 0.0
    w = mod.sideband(q, omega0)
    return 0.5 * pq * response(bath, w), 0.5 * pq * response(bath, -w)


def build_sub_liouvillian(cfg: DipoleConfig, bath: BathSpec, mod: ModulationSpec, q: int, omega0: float) -> Superoperator:
    emit, absorb = multilevel_channels(cfg)
    down, up = sideband_prefactors(bath, mod, q, omega0)
    return Superoperator(cfg.n_levels, down * emit + up * absorb)


def build_total_liouvillian(cfg: DipoleConfig, baths, mod: ModulationSpec, omega0: float, q_window=None) -> Superoperator:
    if q_window is None:
        q_window = mod.window()
    mod.check_positive(omega0)
    total = Superoperator.zero(cfg.n_levels)
    for q in q_window:
        for b in baths:
            total = total + build_sub_liouvillian(cfg, b, mod, q, omega0)
    return total


def kossakowski_blocks(cfg: DipoleConfig, bath: BathSpec, mod: ModulationSpec, q: int, omega0: float):
    """Coefficient matrices of the emission and absorption dissipators (both PSD)."""
    down, up = sideband_prefactors(bath, mod, q, omega0)
    k = cfg.coupling_matrix()
    return down * k, up * k.conj()


# three-level ODE ---------------------------------------------------------------


@dataclass(frozen=True)
class ThreeLevelParams:
    """Single bath, no modulation: G = G(w0), boltzmann = exp(-beta w0)."""

    alpha: float = 1.0
    p: float = 1.0
    phi: float = 0.0
    G: float = 2.0
    boltzmann: float = 0.5
    detuning: float = 0.0

    def config(self) -> DipoleConfig:
        return DipoleConfig.three_level(self.alpha, self.p, self.phi)


@dataclass(frozen=True)
class ThreeLevelODE:
    """x' = A(t) x + b(t) on x = (rho21, rho12, rho00, rho22) and y' = B(t) y on
    y = (rho10, rho01, rho20, rho02).

    With nonzero detuning the cross-term phases rotate, phi -> phi + detuning * t.
    """

    params: ThreeLevelParams

    @property
    def time_dependent(self) -> bool:
        return self.params.detuning != 0.0

    def _phase(self, t):
        pr = self.params
        return np.exp(1j * (pr.phi + pr.detuning * t))

    def A(self, t: float = 0.0) -> np.ndarray:
        pr = self.params
        a, p, e = pr.alpha, pr.p, pr.boltzmann
        z = self._phase(t)
        zc = np.conj(z)
        m = np.array(
            [
                [-1 - a**2, 0, p * a * z * (1 + 2 * e), 0],
                [0, -1 - a**2, p * a * zc * (1 + 2 * e), 0],
                [2 * p * a * zc, 2 * p * a * z, -2 - 2 * e * (1 + a**2), 2 * (a**2 - 1)],
                [-p * a * zc, -p * a * z, 2 * a**2 * e, -2 * a**2],
            ],
            dtype=complex,
        )
        return 0.5 * pr.G * m

    def b(self, t: float = 0.0) -> np.ndarray:
        pr = self.params
        z = self._phase(t)
        return 0.5 * pr.G * np.array([-pr.p * pr.alpha * z, -pr.p * pr.alpha * np.conj(z), 2, 0], dtype=complex)

    def B(self, t: float = 0.0) -> np.ndarray:
        pr = self.params
        a, e = pr.alpha, pr.boltzmann
        # absorption out of |0> runs at (1 + alpha^2) e, the summed strength of both transitions
        aa = 1 + (1 + a**2) * e
        bb = a**2 + (1 + a**2) * e
        c = pr.p * a * self._phase(t)
        cc = np.conj(c)
        m = np.array([[aa, 0, cc, 0], [0, aa, 0, c], [c, 0, bb, 0], [0, cc, 0, bb]], dtype=complex)
        return -0.5 * pr.G * m

    def rhs(self, t, x, y):
        return self.A(t) @ x + self.b(t), self.B(t) @ y

    @staticmethod
    def split(rho: np.ndarray):
        x = np.array([rho[2, 1], rho[1, 2], rho[0, 0], rho[2, 2]], dtype=complex)
        y = np.array([rho[1, 0], rho[0, 1], rho[2, 0], rho[0, 2]], dtype=complex)
        return x, y

    @staticmethod
    def assemble(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        rho = np.zeros((3, 3), dtype=complex)
        rho[2, 1], rho[1, 2], rho[0, 0], rho[2, 2] = x
        rho[1, 0], rho[0, 1], rho[2, 0], rho[0, 2] = y
        rho[1, 1] = 1 - x[2] - x[3]
        return rho


def three_level_ode(params: ThreeLevelParams) -> ThreeLevelODE:
    return ThreeLevelODE(params)


def det_A(params: ThreeLevelParams) -> float:
    """Closed-form determinant of the three-level coefficient matrix.

    The detuned form applies to the rotating-frame matrix where the excited
    levels are split by ``detuning``; the splitting enters as ``4 detuning^2 / G^2``.
    """
    a, p, e, g, dlt = params.alpha, params.p, params.boltzmann, params.G, params.detuning
    geom = (1 + a**2) ** 2 * (1 - p**2) + 4 * dlt**2 / g**2
    return (0.5 * g) ** 4 * 4 * a**2 * (1 + 2 * e) * geom


def detuned_matrix(params: ThreeLevelParams) -> np.ndarray:
    """Time-independent coefficient matrix with the excited-level splitting made explicit."""
    a0 = ThreeLevelODE(ThreeLevelParams(params.alpha, params.p, params.phi, params.G, params.boltzmann)).A()
    return a0 + np.diag([-1j * params.detuning, 1j * params.detuning, 0, 0])


# Dicke ladder ---------------------------------------------------------------


def ladder_operator(n_atoms: int, ladder: str = "uniform") -> np.ndarray:
    """Lowering operator on the symmetric ladder |0>, ..., |N>.

    ``uniform``: ``A = sum_j |j><j+1|`` with the prefactor N carried by the
    generator; its currents and steady state follow the closed-form Dicke results.
    ``collective``: normalized collective lowering operator with matrix elements
    ``sqrt(j (N - j + 1) / N)``, giving downward rates ``gamma j (N - j + 1)``.
    """
    d = n_atoms + 1
    a = np.zeros((d, d), dtype=complex)
    for j in range(1, d):
        if ladder == "uniform":
            a[j - 1, j] = 1.0
        elif ladder == "collective":
            a[j - 1, j] = np.sqrt(j * (n_atoms - j + 1) / n_atoms)
        else:
            raise ValueError(f"unknown ladder {ladder!r}")
    return a


@lru_cache(maxsize=64)
def _dicke_channels(n_atoms, ladder):
    a = ladder_operator(n_atoms, ladder)
    emit = n_atoms * dissipator(a, a.conj().T)
    absorb = n_atoms * dissipator(a.conj().T, a)
    emit.setflags(write=False)
    absorb.setflags(write=False)
    return emit, absorb


def build_dicke_sub_liouvillian(n_atoms: int, bath: BathSpec, mod: ModulationSpec, q: int, omega0: float, ladder: str = "uniform") -> Superoperator:
    emit, absorb = _dicke_channels(n_atoms, ladder)
    down, up = sideband_prefactors(bath, mod, q, omega0)
    return Superoperator(n_atoms + 1, down * emit + up * absorb)


def build_dicke_liouvillian(n_atoms: int, baths, mod: ModulationSpec, omega0: float, q_window=None, ladder: str = "uniform") -> Superoperator:
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    if isinstance(baths, BathSpec):
        baths = [baths]
    if q_window is None:
        q_window = mod.window()
    mod.check_positive(omega0)
    total = Superoperator.zero(n_atoms + 1)
    for q in q_window:
        for b in baths:
            total = total + build_dicke_sub_liouvillian(n_atoms, b, mod, q, omega0, ladder)
    return total
