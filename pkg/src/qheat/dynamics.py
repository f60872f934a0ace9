"""Time evolution and null-space steady states."""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import AmbiguousSteadyState, NonPhysicalInput, StepFailure
from .liouville import Superoperator, ThreeLevelODE, ThreeLevelParams, unvec, vec

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
NULL_TOL = 1e-10
INPUT_TOL = 1e-12


def default_tolerances():
    """Integrator (rtol, atol); ``QHEAT_TOL`` overrides rtol and sets atol = rtol / 100."""
    env = os.environ.get("QHEAT_TOL")
    if env:
        rtol = float(env)
        return rtol, rtol / 100
    return DEFAULT_RTOL, DEFAULT_ATOL


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    observables: dict = field(default_factory=dict)
    converged: bool = True
    residual: float = float("nan")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def check_density_matrix(rho: np.ndarray, dim: int | None = None, tol: float = INPUT_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise NonPhysicalInput(f"density matrix must be square, got shape {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise NonPhysicalInput(f"density matrix has dimension {rho.shape[0]}, expected {dim}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise NonPhysicalInput("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise NonPhysicalInput(f"density matrix trace is {np.trace(rho).real!r}")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] < -tol:
        raise NonPhysicalInput("density matrix is not positive semidefinite")
    return rho


def _complex_ivp(fun, t_span, y0, t_eval, rtol, atol):
    # real-valued integration of a complex system keeps the error norm honest on both parts
    n = len(y0)

    def real_fun(t, u):
        z = fun(t, u[:n] + 1j * u[n:])
        return np.concatenate([z.real, z.imag])

    u0 = np.concatenate([np.real(y0), np.imag(y0)])
    sol = solve_ivp(real_fun, t_span, u0, method="DOP853", t_eval=t_eval, rtol=rtol, atol=atol)
    if sol.status != 0:
        raise StepFailure(sol.message)
    return sol.t, (sol.y[:n] + 1j * sol.y[n:]).T


def evolve(gen, rho0, t_max: float, n_points: int = 201, rtol=None, atol=None, stationary_tol=None, observables=None) -> Trajectory:
    """Integrate the master equation with an explicit adaptive Runge-Kutta scheme.

    ``gen`` is a :class:`Superoperator` or a :class:`ThreeLevelODE`. The final
    state is flagged non-converged when ``||L rho|| >= stationary_tol``, which
    defaults to ``100 * rtol`` (1e-8 at the default tolerances).
    ``observables`` maps names to callables ``rho -> number``.
    """
    d_rtol, d_atol = default_tolerances()
    rtol = d_rtol if rtol is None else rtol
    atol = d_atol if atol is None else atol
    stationary_tol = 100 * rtol if stationary_tol is None else stationary_tol
    times = np.linspace(0.0, t_max, n_points)

    if isinstance(gen, ThreeLevelODE):
        rho0 = check_density_matrix(rho0, 3)
        x0, y0 = gen.split(rho0)

        def fun(t, z):
            dx, dy = gen.rhs(t, z[:4], z[4:])
            return np.concatenate([dx, dy])

        ts, zs = _complex_ivp(fun, (0.0, t_max), np.concatenate([x0, y0]), times, rtol, atol)
        states = np.array([gen.assemble(z[:4], z[4:]) for z in zs])
        dx, dy = gen.rhs(t_max, zs[-1][:4], zs[-1][4:])
        residual = float(np.linalg.norm(np.concatenate([dx, dy])))
    else:
        dim = gen.dim
        rho0 = check_density_matrix(rho0, dim)
        mat = gen.matrix
        ts, zs = _complex_ivp(lambda t, v: mat @ v, (0.0, t_max), vec(rho0), times, rtol, atol)
        states = np.array([unvec(z, dim) for z in zs])
        residual = float(np.linalg.norm(mat @ zs[-1]))

    obs = {name: np.array([f(r) for r in states]) for name, f in (observables or {}).items()}
    return Trajectory(ts, states, obs, residual < stationary_tol, residual)


def evolve_detuned(params: ThreeLevelParams, rho0, t_max: float, **kw) -> Trajectory:
    if params.detuning == 0:
        raise ValueError("evolve_detuned needs a nonzero detuning; use evolve")
    return evolve(ThreeLevelODE(params), rho0, t_max, **kw)


def null_space(mat: np.ndarray, tol: float = NULL_TOL) -> np.ndarray:
    """Orthonormal right null vectors as columns, rank decided relative to the top singular value."""
    _, s, vh = np.linalg.svd(mat)
    top = s[0] if s.size and s[0] > 0 else 1.0
    if s.size == 0 or s[0] == 0:
        return np.eye(mat.shape[1], dtype=complex)
    keep = s <= tol * top
    return vh[keep].conj().T


def stationary_projector(gen: Superoperator) -> np.ndarray:
    """Spectral projector onto the kernel: the t -> infinity limit of exp(L t).

    Built from right null vectors ``R`` and left null vectors ``W`` as
    ``R (W^H R)^{-1} W^H``; valid because every nonzero eigenvalue of a
    dissipative generator has a negative real part.
    """
    mat = gen.matrix
    right = null_space(mat)
    left = null_space(mat.conj().T)
    if right.shape[1] != left.shape[1]:
        raise AmbiguousSteadyState("left and right null spaces differ in dimension")
    return right @ np.linalg.solve(left.conj().T @ right, left.conj().T)


def null_dimension(gen: Superoperator) -> int:
    return null_space(gen.matrix).shape[1]


def steady_state(gen: Superoperator, rho0=None) -> np.ndarray:
    """Steady state of ``gen``.

    A one-dimensional kernel gives the unique state. A larger kernel (dark
    states) needs ``rho0``: the result is the long-time limit reached from it,
    with the dark block frozen and the coupled block thermalized.
    """
    dim = gen.dim
    right = null_space(gen.matrix)
    if right.shape[1] == 1:
        rho = unvec(right[:, 0], dim)
        rho = rho / np.trace(rho)
    else:
        if rho0 is None:
            raise AmbiguousSteadyState(f"kernel has dimension {right.shape[1]}; an initial state is required")
        rho0 = check_density_matrix(rho0, dim, tol=1e-9)
        rho = unvec(stationary_projector(gen) @ vec(rho0), dim)
    return 0.5 * (rho + rho.conj().T)


def integral_of_motion(cfg, rho: np.ndarray) -> float:
    """Dark-state overlap of a three-level state; conserved for parallel degenerate dipoles."""
    a = float(cfg.alphas[1])
    phi = float(np.angle(cfg.alignment[0, 1]))
    val = a**2 * rho[1, 1].real + rho[2, 2].real - 2 * a * (np.exp(1j * phi) * rho[1, 2]).real
    return float(val / (1 + a**2))


def darkness(rho: np.ndarray, dark_proj: np.ndarray) -> float:
    return float(np.real(np.trace(dark_proj @ rho)))
