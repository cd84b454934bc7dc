"""Coherence-order grading, weight filtration and parameter-loop monodromy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from scipy.optimize import linear_sum_assignment

from .errors import InvalidInputError, OnSingularityError, TrackingError
from .models import LiouvilleSpace
from .operator import Operator, as_matrix
from .spectral import SpectralDecomposition


def hodge_grading(space: LiouvilleSpace) -> np.ndarray:
    """Coherence order p = n_exc(row) - n_exc(col) per Liouville index."""
    return space.coherence_order()


@dataclass(frozen=True)
class WeightFiltration:
    """Nested subspaces W_0 ⊆ W_2 ⊆ ... of one eigenvalue cluster.

    ``subspaces`` maps even weight k to an orthonormal basis (columns) of
    W_k; ``weight_of_vector`` maps (chain index, chain position) to the
    weight 2*position of that chain vector. The nilpotent part maps W_k
    into W_{k-2}.
    """

    cluster_id: int
    subspaces: dict[int, np.ndarray]
    weight_of_vector: dict[tuple[int, int], int]

    @property
    def weights(self) -> list[int]:
        return sorted(self.subspaces)

    def dims(self) -> dict[int, int]:
        return {k: b.shape[1] for k, b in self.subspaces.items()}

    def to_report(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "weights": self.weights,
            "dims": self.dims(),
        }


def weight_filtration(dec: SpectralDecomposition, cluster_id: int) -> WeightFiltration:
    """Weight filtration W_{2j} = ker(N^{j+1}) on one cluster's generalized
    eigenspace. A simple decay channel is pure weight 0; a size-(j+1) Jordan
    chain reaches weight 2j.
    """
    if not 0 <= cluster_id < len(dec.clusters):
        raise InvalidInputError(f"no cluster {cluster_id}")
    cl = dec.clusters[cluster_id]
    max_pos = max(len(c) for c in cl.chain_basis) - 1
    subspaces = {}
    weight_of_vector = {}
    for j in range(max_pos + 1):
        vecs = []
        for ci, chain in enumerate(cl.chain_basis):
            for pos, v in enumerate(chain):
                if pos <= j:
                    vecs.append(v)
                weight_of_vector[(ci, pos)] = 2 * pos
        Q, _ = la.qr(np.column_stack(vecs), mode="economic")
        subspaces[2 * j] = Q
    return WeightFiltration(
        cluster_id=cluster_id, subspaces=subspaces, weight_of_vector=weight_of_vector
    )


@dataclass(frozen=True)
class MonodromyResult:
    transport: Operator  # T, expressed in the base-point eigenframe
    eigenphase_permutation: tuple[int, ...]
    unipotent_part: Operator  # T^q
    n_mono: Operator  # (1/2πi) log of the unipotent part
    quasi_unipotent_order: int

    def permutation_cycles(self) -> list[tuple[int, ...]]:
        perm = self.eigenphase_permutation
        seen, cycles = set(), []
        for start in range(len(perm)):
            if start in seen:
                continue
            cyc, i = [], start
            while i not in seen:
                seen.add(i)
                cyc.append(i)
                i = perm[i]
            cycles.append(tuple(cyc))
        return cycles

    def to_report(self) -> dict:
        return {
            "permutation": list(self.eigenphase_permutation),
            "cycles": [list(c) for c in self.permutation_cycles()],
            "quasi_unipotent_order": self.quasi_unipotent_order,
            "n_mono_norm": float(la.norm(self.n_mono.entries)),
        }


def _biorthonormal_frame(M: np.ndarray):
    """Right/left eigenvectors with <L_i|R_i> = 1 and the largest component
    of each R_i made real positive."""
    w, vl, vr = la.eig(M, left=True, right=True)
    n = len(w)
    for i in range(n):
        k = int(np.argmax(np.abs(vr[:, i])))
        phase = vr[k, i] / abs(vr[k, i])
        vr[:, i] /= phase * la.norm(vr[:, i])
        s = vl[:, i].conj() @ vr[:, i]
        if abs(s) < 1e-14:
            raise OnSingularityError("left/right eigenvectors (near) self-orthogonal")
        vl[:, i] /= s.conj()
    return w, vl, vr


def _interpolate_loop(loop: np.ndarray, steps: int) -> np.ndarray:
    """Uniformly resample a closed polyline to ``steps`` points (plus the
    closing point)."""
    loop = np.asarray(loop, dtype=float)
    if loop.ndim != 2 or loop.shape[0] < 2:
        raise InvalidInputError("loop must be a polyline of >= 2 vertices")
    if not np.allclose(loop[0], loop[-1]):
        loop = np.vstack([loop, loop[0]])
    seg = np.linalg.norm(np.diff(loop, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    if arc[-1] == 0:
        raise InvalidInputError("loop has zero length")
    s = np.linspace(0.0, arc[-1], steps + 1)
    pts = np.empty((steps + 1, loop.shape[1]))
    for d in range(loop.shape[1]):
        pts[:, d] = np.interp(s, arc, loop[:, d])
    return pts


def monodromy_loop(
    model_family,
    loop,
    steps: int = 400,
    degeneracy_tol: float = 1e-8,
    unipotent_tol: float = 1e-6,
    overlap_margin: float = 0.99,
) -> MonodromyResult:
    """Transport the biorthogonal eigenframe around a closed parameter loop.

    ``model_family`` maps a parameter point to an Operator/matrix. The
    transport T is the ordered product of adjacent-frame overlap matrices
    with maximal-overlap column matching. ``quasi_unipotent_order`` is the
    smallest q with eig(T^q) all within ``unipotent_tol`` of 1, and n_mono
    is the principal (Mercator-series) logarithm of T^q divided by 2πi.
    """
    if steps < 100:
        raise InvalidInputError("steps must be >= 100")
    pts = _interpolate_loop(loop, steps)
    M0 = as_matrix(model_family(pts[0]))
    dim = M0.shape[0]
    scale = max(la.norm(M0), 1.0)

    w_prev, vl_prev, vr_prev = _biorthonormal_frame(M0)
    w0, vl0, vr0 = w_prev, vl_prev, vr_prev
    T = np.eye(dim, dtype=complex)
    perm_last = np.arange(dim)
    for k in range(1, steps + 1):
        M = as_matrix(model_family(pts[k]))
        w, vl, vr = _biorthonormal_frame(M)
        gaps = np.abs(w[:, None] - w[None, :])[~np.eye(dim, dtype=bool)]
        if dim > 1 and gaps.min() < degeneracy_tol * scale:
            raise OnSingularityError(
                f"loop passes within {gaps.min():.3e} of a degeneracy at step {k}"
            )
        overlap = np.abs(vl_prev.conj().T @ vr)
        row, col = linear_sum_assignment(-overlap)
        # ambiguity check: runner-up overlap within 1% of the chosen one
        for i in row:
            chosen = overlap[i, col[i]]
            rest = np.delete(overlap[i], col[i])
            if rest.size and rest.max() > overlap_margin * chosen:
                raise TrackingError(
                    f"overlap matching ambiguous at step {k}; increase steps"
                )
        vr, vl, w = vr[:, col], vl[:, col], w[col]
        T = T @ (vl_prev.conj().T @ vr)
        perm_last = col
        w_prev, vl_prev, vr_prev = w, vl, vr

    # The frame is re-sorted to base order at every step, so the assignment
    # at the closing point (identical to the base point, hence identically
    # ordered raw eigenvectors) maps base-frame index i to the index the
    # continued eigenvector lands on.
    permutation = tuple(int(x) for x in perm_last)

    # quasi-unipotent order: smallest q <= dim! with eig(T^q) ~ 1
    import math

    q_max = math.factorial(dim) if dim <= 6 else 720
    q = None
    Tq = np.eye(dim, dtype=complex)
    for cand in range(1, q_max + 1):
        Tq = Tq @ T
        if np.all(np.abs(la.eigvals(Tq) - 1.0) < unipotent_tol):
            q = cand
            break
    if q is None:
        raise TrackingError("transport is not quasi-unipotent at the given tolerance")

    # principal log of the unipotent part via the finite Mercator series
    E = Tq - np.eye(dim)
    N = np.zeros_like(E)
    term = np.eye(dim, dtype=complex)
    for j in range(1, dim + 1):
        term = term @ E
        N += ((-1) ** (j + 1) / j) * term
    N = N / (2j * np.pi)

    return MonodromyResult(
        transport=Operator(T),
        eigenphase_permutation=permutation,
        unipotent_part=Operator(Tq),
        n_mono=Operator(N),
        quasi_unipotent_order=q,
    )
