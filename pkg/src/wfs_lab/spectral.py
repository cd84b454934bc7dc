"""Dense spectral algebra: exponentials, clustered Jordan structure, Λ+N split."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import (
    IllConditionedStructureError,
    InvalidInputError,
    RangeOverflowError,
    StiffnessError,
)
from .operator import Operator, as_matrix

#: safety factor applied on top of dim*eps*||A|| when deciding numerical ranks
DEFAULT_RANK_SAFETY = 1e3

_EXP_OVERFLOW = 700.0  # log of float64 overflow, with margin


def matrix_exp(A, t: float = 1.0) -> Operator:
    """Compute e^{A t} by scaling-and-squaring with Padé kernels.

    Raises :class:`RangeOverflowError` when the result would overflow and
    :class:`InvalidInputError` for non-finite input.
    """
    labels = A.basis_labels if isinstance(A, Operator) else None
    M = as_matrix(A)
    if not np.all(np.isfinite(M.view(float))) or not np.isfinite(t):
        raise InvalidInputError("matrix_exp requires finite entries and time")
    At = M * t
    nrm = la.norm(At, 2)
    if nrm > _EXP_OVERFLOW:
        # ||e^{At}|| can only overflow if the spectral abscissa is huge;
        # check it before refusing.
        abscissa = float(np.max(np.linalg.eigvals(At).real))
        if abscissa > _EXP_OVERFLOW:
            raise RangeOverflowError(
                f"e^(At) overflows: spectral abscissa {abscissa:.3g}", norm=nrm
            )
    return Operator(la.expm(At), labels)


def _rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def propagate_rk4(A, v, t_grid, tol: float = 1e-10) -> list[np.ndarray]:
    """Integrate dy/dt = A y with adaptive classical RK4 (step doubling).

    Returns the state at every point of ``t_grid`` (strictly increasing,
    starting at 0). Local error per step is kept below ``tol``.
    """
    M = as_matrix(A)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or abs(t_grid[0]) > 1e-300:
        raise InvalidInputError("t_grid must be 1-D and start at 0")
    if t_grid.size > 1 and np.any(np.diff(t_grid) <= 0):
        raise InvalidInputError("t_grid must be strictly increasing")
    if tol <= 0:
        raise InvalidInputError("tol must be positive")

    y = np.asarray(v, dtype=complex).copy()
    if y.shape != (M.shape[0],):
        raise InvalidInputError("state vector does not match operator dimension")

    f = lambda x: M @ x
    span = max(t_grid[-1], 1e-300)
    h_min = 1e-14 * span
    out = []
    t = 0.0
    h = span / 100.0
    for t_target in t_grid:
        while t < t_target - 1e-15 * span:
            h = min(h, t_target - t)
            while True:
                full = _rk4_step(f, y, h)
                half = _rk4_step(f, _rk4_step(f, y, h / 2), h / 2)
                err = la.norm(half - full) / 15.0
                scale = max(la.norm(y), 1.0)
                if err <= tol * scale or h <= h_min:
                    if h <= h_min and err > tol * scale:
                        raise StiffnessError(
                            f"required step below {h_min:.3g} at t={t:.6g}"
                        )
                    # Richardson extrapolation of the doubled step
                    y = half + (half - full) / 15.0
                    t += h
                    break
                h = max(h * max(0.1, 0.9 * (tol * scale / err) ** 0.2), h_min)
            # grow the step cautiously after acceptance
            if err > 0:
                h = min(h * min(5.0, 0.9 * (tol * scale / err) ** 0.2 + 1.0), span)
            else:
                h = min(2 * h, span)
        out.append(y.copy())
    return out


@dataclass(frozen=True)
class JordanCluster:
    """One eigenvalue cluster with its inferred Jordan data.

    ``chain_basis`` holds one list per Jordan chain, ordered from the kernel
    vector upward: chain[0] is annihilated by N, N chain[i] = chain[i-1].
    """

    center: complex
    eigenvalues: np.ndarray
    algebraic_multiplicity: int
    block_sizes: tuple[int, ...]
    chain_basis: tuple[tuple[np.ndarray, ...], ...]
    subspace: np.ndarray  # orthonormal basis of the generalized eigenspace


@dataclass(frozen=True)
class SpectralDecomposition:
    clusters: tuple[JordanCluster, ...]
    semisimple: Operator
    nilpotent: Operator
    cluster_tol: float

    @property
    def dim(self) -> int:
        return self.semisimple.dim

    def cluster_of(self, value: complex) -> int:
        """Index of the cluster whose center is closest to ``value``."""
        return int(
            np.argmin([abs(c.center - value) for c in self.clusters])
        )


def _cluster_eigenvalues(eigs: np.ndarray, tol: float) -> list[np.ndarray]:
    """Transitive-closure clustering of complex points at absolute tol."""
    n = len(eigs)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(eigs[i] - eigs[j]) < tol:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    # deterministic order: by (Re, Im) of the group mean
    idx_groups = sorted(
        groups.values(),
        key=lambda g: (np.mean(eigs[g]).real, np.mean(eigs[g]).imag),
    )
    return [np.array(g, dtype=int) for g in idx_groups]


def _rank(svals: np.ndarray, thresh: float) -> int:
    ambiguous = svals[(svals > thresh / 10) & (svals < thresh * 10)]
    if ambiguous.size:
        raise IllConditionedStructureError(
            f"singular value {ambiguous[0]:.3e} within a factor 10 of the rank "
            f"threshold {thresh:.3e}; widen cluster_tol deliberately",
            gap=float(ambiguous[0] / thresh),
        )
    return int(np.sum(svals > thresh))


def _kernel_basis(M: np.ndarray, thresh: float) -> np.ndarray:
    """Orthonormal basis of the numerical kernel of M (columns)."""
    if M.shape[0] == 0:
        return np.zeros((M.shape[1], M.shape[1]))
    _, s, vh = la.svd(M)
    r = _rank(s, thresh)
    return vh[r:].conj().T


def _orth_complement_in(vectors: np.ndarray, against: np.ndarray, count: int):
    """Pick ``count`` orthonormal vectors in span(vectors) ⊥ span(against)."""
    if against.shape[1] == 0:
        proj = vectors
    else:
        q, _ = la.qr(against, mode="economic")
        proj = vectors - q @ (q.conj().T @ vectors)
    u, s, _ = la.svd(proj, full_matrices=False)
    return u[:, :count]


def _jordan_chains(N_loc: np.ndarray, thresh: float):
    """Jordan chains of a (numerically) nilpotent m×m matrix.

    Returns (block_sizes, chains) with each chain listed from the kernel
    vector upward.
    """
    m = N_loc.shape[0]
    if m == 1:
        return (1,), ((np.array([1.0 + 0j]),),)
    # kernel dimension sequence d_j = dim ker(N^j)
    kernels = [np.zeros((m, 0))]
    power = np.eye(m, dtype=complex)
    d = [0]
    while d[-1] < m:
        power = power @ N_loc
        kernels.append(_kernel_basis(power, thresh))
        d.append(kernels[-1].shape[1])
        if len(d) > m + 1:
            raise IllConditionedStructureError(
                "nilpotency not reached within the cluster dimension"
            )
    p = len(d) - 1  # largest block size
    block_sizes = []
    for j in range(1, p + 1):
        d_prev, d_j = d[j - 1], d[j]
        d_next = d[j + 1] if j + 1 <= p else d[p]
        b = 2 * d_j - d_next - d_prev
        block_sizes.extend([j] * b)
    block_sizes = tuple(sorted(block_sizes, reverse=True))

    chains: list[list[np.ndarray]] = []  # top -> bottom while building
    for j in range(p, 0, -1):
        # every existing chain descends one level
        carried = []
        for chain in chains:
            v = N_loc @ chain[-1]
            chain.append(v)
            carried.append(v)
        # blocks of size >= j minus chains already running
        need = (d[j] - d[j - 1]) - len(chains)
        if need > 0:
            cols = [kernels[j - 1]] + [c.reshape(-1, 1) for c in carried]
            against = (
                np.column_stack(cols)
                if sum(c.shape[1] for c in cols)
                else np.zeros((m, 0))
            )
            tops = _orth_complement_in(kernels[j], against, need)
            for k in range(need):
                chains.append([tops[:, k]])
    # reverse so chain[0] lies in ker N and N chain[i] = chain[i-1]
    ordered = tuple(tuple(reversed(c)) for c in chains)
    return block_sizes, ordered


def spectral_decompose(
    A,
    cluster_tol: float | None = None,
    rank_safety: float = DEFAULT_RANK_SAFETY,
) -> SpectralDecomposition:
    """Clustered eigendecomposition with Jordan structure and Λ+N split.

    Eigenvalues within ``cluster_tol`` of each other (transitive closure)
    are merged into one cluster; Jordan block sizes are inferred from the
    rank sequence of the restricted nilpotent part. Default cluster_tol is
    1e-8·||A||_F.
    """
    labels = A.basis_labels if isinstance(A, Operator) else None
    M = as_matrix(A)
    if not np.all(np.isfinite(M.view(float))):
        raise InvalidInputError("spectral_decompose requires finite entries")
    n = M.shape[0]
    normF = la.norm(M)
    if cluster_tol is None:
        cluster_tol = 1e-8 * max(normF, 1.0)
    if cluster_tol <= 0:
        raise InvalidInputError("cluster_tol must be positive")
    norm2 = la.norm(M, 2) if n > 1 else abs(M[0, 0])
    thresh = n * np.finfo(float).eps * max(norm2, 1e-300) * rank_safety

    T, Z = la.schur(M, output="complex")
    eigs = np.diag(T).copy()
    groups = _cluster_eigenvalues(eigs, cluster_tol)

    clusters = []
    basis_blocks = []
    centers = []
    for g in groups:
        members = eigs[g]
        center = complex(np.mean(members))
        m = len(g)
        if m == n:
            Q = Z.copy()
        else:
            radius = cluster_tol * 0.5
            sel = lambda x: bool(np.min(np.abs(x - members)) < radius)
            Ts, Zs, sdim = la.schur(M, output="complex", sort=sel)
            if sdim != m:
                raise IllConditionedStructureError(
                    f"Schur reordering selected {sdim} eigenvalues, expected {m}"
                )
            Q = Zs[:, :m]
        M_loc = Q.conj().T @ M @ Q
        N_loc = M_loc - center * np.eye(m)
        block_sizes, chains_loc = _jordan_chains(N_loc, thresh)
        chains = tuple(tuple(Q @ v for v in chain) for chain in chains_loc)
        clusters.append(
            JordanCluster(
                center=center,
                eigenvalues=members,
                algebraic_multiplicity=m,
                block_sizes=block_sizes,
                chain_basis=chains,
                subspace=Q,
            )
        )
        basis_blocks.append(Q)
        centers.extend([center] * m)

    V = np.column_stack(basis_blocks)
    D = np.diag(np.array(centers, dtype=complex))
    Vinv = la.inv(V)
    Lambda = V @ D @ Vinv
    N = M - Lambda
    return SpectralDecomposition(
        clusters=tuple(clusters),
        semisimple=Operator(Lambda, labels),
        nilpotent=Operator(N, labels),
        cluster_tol=float(cluster_tol),
    )
