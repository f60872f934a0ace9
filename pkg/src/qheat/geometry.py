"""Dipole geometry of the degenerate V-type working medium.

A configuration holds the relative transition strengths ``alphas`` and the
dipole alignment matrix ``M_ij = p_ij exp(i phi_ij) = d_i^* . d_j / (|d_i||d_j|)``.
Parallel dipoles (``p_ij = 1``) are grouped into domains; every domain has one
bright state and ``n - 1`` dark states.

Excited level ``j`` (1-based in the physics) lives at Hilbert index ``j``; the
ground state is index 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBasis, InvalidConfig

PARALLEL_TOL = 1e-9
RANK_TOL = 1e-9
VALUE_TOL = 1e-9


@dataclass(frozen=True)
class DipoleConfig:
    n_levels: int
    alphas: np.ndarray
    alignment: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alphas", np.asarray(self.alphas, dtype=float))
        object.__setattr__(self, "alignment", np.asarray(self.alignment, dtype=complex))

    @classmethod
    def from_vectors(cls, vectors) -> "DipoleConfig":
        """Build from explicit complex 3-vectors; the first vector is the reference."""
        d = np.atleast_2d(np.asarray(vectors, dtype=complex))
        if d.shape[1] != 3:
            raise InvalidConfig(f"dipole vectors must be 3-dimensional, got shape {d.shape}")
        norms = np.linalg.norm(d, axis=1)
        if np.any(norms == 0):
            raise InvalidConfig("zero-length dipole vector")
        u = d / norms[:, None]
        gram = u.conj() @ u.T
        np.fill_diagonal(gram, 1.0)
        return cls(d.shape[0] + 1, norms / norms[0], gram)

    @classmethod
    def from_polar(cls, alphas, moduli, phases) -> "DipoleConfig":
        """Build from alignment moduli ``p_ij`` and phases ``phi_ij``."""
        moduli = np.asarray(moduli, dtype=float)
        phases = np.asarray(phases, dtype=float)
        alphas = np.asarray(alphas, dtype=float)
        return cls(len(alphas) + 1, alphas, moduli * np.exp(1j * phases))

    @classmethod
    def three_level(cls, alpha: float = 1.0, p: float = 1.0, phi: float = 0.0) -> "DipoleConfig":
        m = np.array([[1.0, p * np.exp(1j * phi)], [p * np.exp(-1j * phi), 1.0]])
        return cls(3, [1.0, alpha], m)

    @property
    def n_excited(self) -> int:
        return self.n_levels - 1

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.alphas**2))

    def coupling_matrix(self) -> np.ndarray:
        """Kossakowski matrix ``alpha_j alpha_j' M_jj'`` of the emission channel."""
        return np.outer(self.alphas, self.alphas) * self.alignment


@dataclass
class ValidationReport:
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return "pass" if self.ok else "; ".join(self.failures)


def validate_config(cfg: DipoleConfig) -> ValidationReport:
    rep = ValidationReport()
    k = cfg.n_excited
    if cfg.n_levels < 2:
        rep.failures.append("n_levels must be >= 2")
        return rep
    if cfg.alphas.shape != (k,):
        rep.failures.append(f"expected {k} alphas, got shape {cfg.alphas.shape}")
        return rep
    if cfg.alignment.shape != (k, k):
        rep.failures.append(f"expected {k}x{k} alignment matrix, got shape {cfg.alignment.shape}")
        return rep

    a = cfg.alphas
    if abs(a[0] - 1.0) > VALUE_TOL:
        rep.failures.append("alpha_1 must equal 1")
    if np.any(a <= 0) or np.any(a > 1 + VALUE_TOL):
        rep.failures.append("alphas must lie in (0, 1]")

    m = cfg.alignment
    if not np.allclose(m, m.conj().T, atol=VALUE_TOL, rtol=0):
        rep.failures.append("alignment matrix is not Hermitian")
    if np.max(np.abs(np.diag(m) - 1.0)) > VALUE_TOL:
        rep.failures.append("alignment diagonal must be 1")
    if np.any(np.abs(m) > 1 + VALUE_TOL):
        rep.failures.append("alignment moduli must lie in [0, 1]")

    herm = 0.5 * (m + m.conj().T)
    ev = np.linalg.eigvalsh(herm)
    top = max(ev[-1], 0.0)
    if ev[0] < -RANK_TOL * max(top, 1.0):
        rep.failures.append(f"alignment matrix is not positive semidefinite (min eigenvalue {ev[0]:.3g})")
    rank = int(np.sum(ev > RANK_TOL * top))
    if rank > 3:
        rep.failures.append(f"alignment matrix has rank {rank} > 3; not realizable by 3-vectors")

    par = np.abs(m) >= 1 - PARALLEL_TOL
    phases = np.angle(m)
    for i in range(k):
        for j in range(k):
            if i == j or not par[i, j]:
                continue
            for l in range(k):
                if l in (i, j) or not par[j, l]:
                    continue
                if not par[i, l]:
                    rep.failures.append(f"parallelism not transitive for ({i + 1},{j + 1},{l + 1})")
                    continue
                dphi = phases[i, j] + phases[j, l] - phases[i, l]
                if abs(np.angle(np.exp(1j * dphi))) > 1e-6:
                    rep.failures.append(f"phases not additive for ({i + 1},{j + 1},{l + 1})")
    # report each distinct failure once
    rep.failures = list(dict.fromkeys(rep.failures))
    return rep


@dataclass(frozen=True)
class DomainDecomposition:
    """Parallel-dipole domains.

    ``domains`` holds only groups with two or more members; lone dipoles are
    kept separately in ``lone``. Indices are 0-based transition indices.
    """

    n_levels: int
    domains: tuple
    lone: tuple
    couplings: tuple

    @property
    def sizes(self) -> tuple:
        return tuple(len(d) for d in self.domains)

    @property
    def p(self) -> int:
        return len(self.domains)

    @property
    def n_parallel(self) -> int:
        return sum(self.sizes)

    @property
    def n_eff(self) -> int:
        return self.p + self.n_levels - self.n_parallel


def decompose_domains(cfg: DipoleConfig, tol: float = PARALLEL_TOL) -> DomainDecomposition:
    rep = validate_config(cfg)
    if not rep:
        raise InvalidConfig(str(rep))
    k = cfg.n_excited
    par = np.abs(cfg.alignment) >= 1 - tol
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(k):
        for j in range(i + 1, k):
            if par[i, j]:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    groups: dict = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(i)
    ordered = sorted(groups.values(), key=lambda g: g[0])
    domains = tuple(tuple(g) for g in ordered if len(g) > 1)
    lone = tuple(g[0] for g in ordered if len(g) == 1)
    a = cfg.alphas
    couplings = tuple(float(np.sqrt(np.sum(a[list(d)] ** 2))) for d in domains)
    couplings += tuple(float(a[j]) for j in lone)
    return DomainDecomposition(cfg.n_levels, domains, lone, couplings)


@dataclass(frozen=True)
class CollectiveBasis:
    """Unitary change of basis: ground, bright states, lone states, dark states.

    ``hidden_dark`` holds decoupled states inside the bright/lone span. They
    appear when the effective dipoles are linearly dependent, which is always
    the case for more than three of them in three dimensions. The block is
    empty for linearly independent effective dipoles.
    """

    matrix: np.ndarray
    bright_indices: tuple
    lone_indices: tuple
    dark_indices: tuple
    hidden_dark: np.ndarray
    n_coupled: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_thermal(self) -> int:
        """Number of levels that thermalize (ground plus coupled excited states)."""
        return 1 + self.n_coupled

    def column(self, i: int) -> np.ndarray:
        return self.matrix[:, i]


def _gram_schmidt_complete(fixed, seeds, dim, tol=1e-8):
    basis = [v / np.linalg.norm(v) for v in fixed]
    added = []
    for s in seeds:
        v = s.astype(complex).copy()
        for _ in range(2):
            for b in basis + added:
                v -= np.vdot(b, v) * b
        n = np.linalg.norm(v)
        if n > tol:
            added.append(v / n)
    return added


def build_collective_basis(dec: DomainDecomposition, cfg: DipoleConfig) -> CollectiveBasis:
    n = cfg.n_levels
    a = cfg.alphas
    m = cfg.alignment
    cols = [np.eye(n, dtype=complex)[:, 0]]
    brights, darks = [], []
    for dom in dec.domains:
        ref = dom[0]
        v = np.zeros(n, dtype=complex)
        for j in dom:
            v[j + 1] = a[j] * np.exp(1j * np.angle(m[ref, j]))
        v /= np.sqrt(np.sum(a[list(dom)] ** 2))
        brights.append(v)
    for bv, dom in zip(brights, dec.domains):
        seeds = [np.eye(n)[:, j + 1] for j in dom]
        found = _gram_schmidt_complete([bv], seeds, n)
        if len(found) != len(dom) - 1:
            raise DegenerateBasis(f"domain {tuple(j + 1 for j in dom)}: found {len(found)} dark states")
        darks.extend(found)
    lones = [np.eye(n, dtype=complex)[:, j + 1] for j in dec.lone]

    cols = cols + brights + lones + darks
    u = np.column_stack(cols)
    if not np.allclose(u.conj().T @ u, np.eye(n), atol=1e-12):
        raise DegenerateBasis("collective basis is not orthonormal")
    nb, nl = len(brights), len(lones)
    bright_idx = tuple(range(1, 1 + nb))
    lone_idx = tuple(range(1 + nb, 1 + nb + nl))
    dark_idx = tuple(range(1 + nb + nl, n))

    # decoupled directions of the full coupling (conjugate kernel of the Kossakowski matrix)
    k = cfg.coupling_matrix()
    ev, vecs = np.linalg.eigh(0.5 * (k + k.conj().T))
    null = ev <= RANK_TOL * max(ev[-1], 1e-300)
    rank = int(np.sum(~null))
    kernel = np.zeros((n, int(np.sum(null))), dtype=complex)
    kernel[1:, :] = vecs[:, null].conj()
    proj_kernel = kernel @ kernel.conj().T
    proj_domain_dark = u[:, list(dark_idx)] @ u[:, list(dark_idx)].conj().T
    extra = proj_kernel - proj_domain_dark
    ev2, vec2 = np.linalg.eigh(0.5 * (extra + extra.conj().T))
    hidden = vec2[:, ev2 > 0.5]
    if hidden.shape[1] != kernel.shape[1] - len(darks):
        raise DegenerateBasis("dark subspace does not contain the domain dark states")
    return CollectiveBasis(u, bright_idx, lone_idx, dark_idx, hidden, rank)


def dark_projector(basis: CollectiveBasis) -> np.ndarray:
    """Projector onto every decoupled (dark) excited state."""
    d = basis.matrix[:, list(basis.dark_indices)]
    proj = d @ d.conj().T
    if basis.hidden_dark.shape[1]:
        proj = proj + basis.hidden_dark @ basis.hidden_dark.conj().T
    return proj


def coupled_projector(basis: CollectiveBasis) -> np.ndarray:
    """Projector onto the excited states that exchange quanta with the baths."""
    n = basis.dim
    proj = np.eye(n, dtype=complex) - dark_projector(basis)
    proj[0, 0] -= 1.0
    return proj


def random_config(n_levels: int, rng: np.random.Generator, n_parallel_groups=None) -> DipoleConfig:
    """Random realizable geometry from random unit vectors in C^3.

    With ``n_parallel_groups`` set, the excited transitions are split into that
    many groups sharing one direction each (random phases and strengths).
    """
    k = n_levels - 1
    if n_parallel_groups is None:
        dirs = rng.normal(size=(k, 3)) + 1j * rng.normal(size=(k, 3))
    else:
        base = rng.normal(size=(n_parallel_groups, 3)) + 1j * rng.normal(size=(n_parallel_groups, 3))
        labels = np.concatenate([np.arange(n_parallel_groups), rng.integers(0, n_parallel_groups, k - n_parallel_groups)])
        labels = rng.permutation(labels)
        dirs = base[labels] * np.exp(1j * rng.uniform(0, 2 * np.pi, size=(k, 1)))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    strengths = np.concatenate([[1.0], rng.uniform(0.2, 1.0, size=k - 1)])
    return DipoleConfig.from_vectors(dirs * strengths[:, None])
