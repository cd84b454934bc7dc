"""Harmonic inversion: Matrix Pencil, Prony/Pade, pole-model Laplace maps
and a regularized direct double-Laplace transform.

Pole convention: a signal term t^{m-1} e^{s t} / (m-1)! corresponds to a pole
of order m located at s in the one-sided Laplace transform, i.e. the factor
1/(s' - s)^m. Decay-rate map axes are real and positive for decaying
channels: the map is evaluated at s' = -s_axis + i*im_offset.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import (
    AliasingError,
    ConditioningError,
    ContaminationWarning,
    InconsistentModelError,
    InvalidInputError,
)
from .response import ResponseGrid

#: repeated pencil eigenvalues closer than this fraction of the spectral span
#: are merged into one higher-order pole
DEFAULT_ORDER_CLUSTER_FRAC = 1e-4

#: relative least-squares residual above which a fit is flagged (not failed)
POOR_FIT_RESIDUAL = 0.1


@dataclass(frozen=True)
class PoleEntry:
    s: complex
    order: int
    coeffs: np.ndarray  # coeffs[j] multiplies t^j e^{s t}

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=complex))
        if self.order < 1 or len(self.coeffs) != self.order:
            raise InvalidInputError("order must be >= 1 with one coefficient per power")


@dataclass(frozen=True)
class PoleTable:
    axis: str
    entries: tuple[PoleEntry, ...]
    fit_residual: float
    status: str = "ok"  # "ok" | "poor_fit"

    def __post_init__(self):
        ordered = tuple(
            sorted(self.entries, key=lambda e: (-e.s.real, e.s.imag))
        )
        object.__setattr__(self, "entries", ordered)

    @property
    def poles(self) -> np.ndarray:
        return np.array([e.s for e in self.entries])

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(e.order for e in self.entries)

    def model_eval(self, t) -> np.ndarray:
        """Reconstruct the time-domain signal from the pole model."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for e in self.entries:
            base = np.exp(e.s * t)
            for j, c in enumerate(e.coeffs):
                out += c * t**j * base
        return out

    def to_json_dict(self) -> dict:
        return {
            "axis": self.axis,
            "fit_residual": self.fit_residual,
            "status": self.status,
            "entries": [
                {
                    "s_re": e.s.real,
                    "s_im": e.s.imag,
                    "order": e.order,
                    "coeffs_re": e.coeffs.real.tolist(),
                    "coeffs_im": e.coeffs.imag.tolist(),
                }
                for e in self.entries
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "PoleTable":
        entries = tuple(
            PoleEntry(
                s=complex(x["s_re"], x["s_im"]),
                order=int(x["order"]),
                coeffs=np.asarray(x["coeffs_re"]) + 1j * np.asarray(x["coeffs_im"]),
            )
            for x in d["entries"]
        )
        return cls(
            axis=d["axis"],
            entries=entries,
            fit_residual=float(d["fit_residual"]),
            status=d.get("status", "ok"),
        )


@dataclass(frozen=True)
class LaplaceMap2D:
    s1_axis: np.ndarray
    s2_axis: np.ndarray
    values: np.ndarray  # real, >= 0
    source: str  # "pole-model" | "direct-transform"
    im_offset: tuple[float, float] = (0.0, 0.0)
    sheet: str = "matched"  # "matched": each pole factor on its own frequency sheet
    flagged: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        s1 = np.asarray(self.s1_axis, dtype=float)
        s2 = np.asarray(self.s2_axis, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.shape != (s1.size, s2.size):
            raise InvalidInputError("map shape does not match axes")
        if np.any(v < 0):
            raise InvalidInputError("map values must be non-negative")
        object.__setattr__(self, "s1_axis", s1)
        object.__setattr__(self, "s2_axis", s2)
        object.__setattr__(self, "values", v)

    def peak(self) -> tuple[float, float, float]:
        """(s1, s2, value) of the global maximum."""
        i, j = np.unravel_index(np.argmax(self.values), self.values.shape)
        return float(self.s1_axis[i]), float(self.s2_axis[j]), float(self.values[i, j])

    def to_csv(self, path, sidecar=None):
        import csv as _csv
        import json

        with open(path, "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["s1", "s2", "value"])
            for i, a in enumerate(self.s1_axis):
                for j, b in enumerate(self.s2_axis):
                    w.writerow([repr(float(a)), repr(float(b)), repr(float(self.values[i, j]))])
        if sidecar is not None:
            with open(sidecar, "w") as fh:
                json.dump(
                    {
                        "source": self.source,
                        "sheet": self.sheet,
                        "im_offset": list(self.im_offset),
                        "flagged": [list(x) for x in self.flagged],
                        "shape": list(self.values.shape),
                    },
                    fh,
                    indent=2,
                )


def _principal_log_poles(z: np.ndarray, dt: float) -> tuple[np.ndarray, bool]:
    """Principal-branch continuous poles. Pencil eigenvalues sitting on the
    Nyquist edge (phase within 0.1% of pi) are split off: they are either
    spurious or genuinely aliased, which the caller decides from the fit
    residual without them."""
    keep = np.abs(z) > 1e-12
    s = np.log(z[keep].astype(complex)) / dt
    edge = np.abs(s.imag) * dt > np.pi * 0.999
    return s[~edge], bool(np.any(edge))


def _cluster_poles(points: np.ndarray, tol: float):
    """Transitive-closure clustering of complex pole estimates; returns a
    list of index arrays sorted by (-Re, Im) of the cluster mean."""
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(points[i] - points[j]) < tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(
        groups.values(),
        key=lambda g: (-np.mean(points[g]).real, np.mean(points[g]).imag),
    )


def _fit_coeffs(samples: np.ndarray, t: np.ndarray, poles, orders):
    """Least squares of the samples against the t^j e^{st} basis. Returns
    (per-pole coefficient arrays, relative residual)."""
    cols = []
    for s, m in zip(poles, orders):
        base = np.exp(s * t)
        for j in range(m):
            cols.append(t**j * base)
    Phi = np.column_stack(cols)
    c, *_ = la.lstsq(Phi, samples)
    norm = la.norm(samples)
    resid = la.norm(Phi @ c - samples) / norm if norm > 0 else 0.0
    out, k = [], 0
    for m in orders:
        out.append(c[k : k + m])
        k += m
    return out, float(resid)


def matrix_pencil_1d(
    samples,
    dt: float,
    max_modes: int | None = None,
    svd_tol: float = 1e-8,
    order_cluster_tol: float | None = None,
    axis: str = "t",
    pencil_param: int | None = None,
) -> PoleTable:
    """Matrix Pencil harmonic inversion of uniformly sampled data.

    Pencil parameter defaults to ~ one third of the record (``pencil_param``
    overrides it, trading noise averaging for speed on long records); the
    model order is the number of normalized Hankel singular values above
    ``svd_tol`` (capped by ``max_modes``). Pencil eigenvalues closer than
    ``order_cluster_tol`` are merged into one pole whose order is the
    multiplicity.
    """
    y = np.asarray(samples, dtype=complex).ravel()
    N = y.size
    if dt <= 0:
        raise InvalidInputError("dt must be positive")
    if max_modes is None:
        max_modes = max(1, (N - 2) // 3)
    if N < 2 * max_modes + 2:
        raise InvalidInputError(
            f"need >= {2 * max_modes + 2} samples for max_modes={max_modes}"
        )
    L = pencil_param if pencil_param is not None else max(max_modes, N // 3)
    L = max(L, max_modes)
    L = min(L, N - max_modes - 1)
    rows = N - L
    # Hankel pair Y0, Y1 from the shifted record
    Y = la.hankel(y[: rows], y[rows - 1 :])  # rows x (L+1)
    Y0, Y1 = Y[:, :-1], Y[:, 1:]
    small = min(Y0.shape)
    if small > 64 and (max_modes + 2) * 8 < small:
        # long record, few modes: truncated SVD (deterministic start vector)
        from scipy.sparse.linalg import ArpackError, svds

        k = min(max_modes + 2, small - 1)
        v0 = np.random.Generator(np.random.Philox(0)).standard_normal(small)
        try:
            U, sv, Vh = svds(Y0, k=k, v0=v0)
            idx = np.argsort(sv)[::-1]
            U, sv, Vh = U[:, idx], sv[idx], Vh[idx]
        except ArpackError:
            # numerically rank-deficient Hankel: fewer true modes than k
            U, sv, Vh = la.svd(Y0, full_matrices=False)
    else:
        U, sv, Vh = la.svd(Y0, full_matrices=False)
    if sv[0] == 0:
        return PoleTable(axis=axis, entries=(), fit_residual=0.0)
    r = int(np.sum(sv / sv[0] > svd_tol))
    r = max(1, min(r, max_modes))
    A = (U[:, :r].conj().T @ Y1 @ Vh[:r].conj().T) / sv[:r]
    z = la.eigvals(A)
    s, had_edge = _principal_log_poles(z, dt)
    if s.size == 0:
        if had_edge:
            raise AliasingError(
                "all pole frequencies sit at the Nyquist edge; decrease dt"
            )
        return PoleTable(axis=axis, entries=(), fit_residual=1.0, status="poor_fit")

    span = float(np.max(np.abs(s[:, None] - s[None, :]))) if s.size > 1 else abs(s[0])
    span = max(span, abs(s).max(), 1.0 / (dt * N))
    if order_cluster_tol is None:
        order_cluster_tol = DEFAULT_ORDER_CLUSTER_FRAC * span
    groups = _cluster_poles(s, order_cluster_tol)
    poles = [complex(np.mean(s[g])) for g in groups]
    orders = [len(g) for g in groups]

    t = np.arange(N) * dt
    coeff_arrays, resid = _fit_coeffs(y, t, poles, orders)
    if had_edge and resid > 1e-2:
        raise AliasingError(
            "signal content at the Nyquist edge cannot be modeled; decrease dt"
        )
    entries = tuple(
        PoleEntry(s=p, order=m, coeffs=c)
        for p, m, c in zip(poles, orders, coeff_arrays)
    )
    status = "poor_fit" if resid > POOR_FIT_RESIDUAL else "ok"
    return PoleTable(axis=axis, entries=entries, fit_residual=resid, status=status)


def pade_poles_1d(
    samples,
    dt: float,
    degree: int,
    order_cluster_tol: float | None = None,
    axis: str = "t",
) -> PoleTable:
    """Pole extraction via the denominator of a rational (Pade-type)
    approximant to the z-transform, i.e. Prony linear prediction.

    Spurious poles with coefficient magnitude < 1e-10 of the largest are
    pruned.
    """
    y = np.asarray(samples, dtype=complex).ravel()
    N = y.size
    if degree < 1 or N < 2 * degree + 1:
        raise InvalidInputError("need >= 2*degree + 1 samples")
    # linear prediction: y[k] = -sum a_j y[k-j]
    H = la.hankel(y[:degree], y[degree - 1 : N - 1]).T  # (N-degree) x degree
    H = H[:, ::-1]
    rhs = -y[degree:]
    sv = la.svd(H, compute_uv=False)
    if sv[0] == 0:
        raise ConditioningError(
            "degenerate prediction equations; reduce degree or add data"
        )
    # minimum-norm solution: rank deficiency just means fewer true modes
    # than the requested degree, and the surplus roots are pruned below
    a, *_ = la.lstsq(H, rhs, cond=1e-12)
    z = np.roots(np.concatenate([[1.0], a]))
    s, had_edge = _principal_log_poles(z, dt)
    if s.size == 0:
        if had_edge:
            raise AliasingError(
                "all pole frequencies sit at the Nyquist edge; decrease dt"
            )
        return PoleTable(axis=axis, entries=(), fit_residual=1.0, status="poor_fit")
    span = float(np.max(np.abs(s[:, None] - s[None, :]))) if s.size > 1 else abs(s[0])
    span = max(span, abs(s).max(), 1.0 / (dt * N))
    if order_cluster_tol is None:
        order_cluster_tol = DEFAULT_ORDER_CLUSTER_FRAC * span
    groups = _cluster_poles(s, order_cluster_tol)
    poles = [complex(np.mean(s[g])) for g in groups]
    orders = [len(g) for g in groups]
    t = np.arange(N) * dt
    coeff_arrays, resid = _fit_coeffs(y, t, poles, orders)
    if had_edge and resid > 1e-2:
        raise AliasingError(
            "signal content at the Nyquist edge cannot be modeled; decrease dt"
        )
    # prune spurious poles by coefficient magnitude
    peak = max((np.abs(c).max() for c in coeff_arrays), default=0.0)
    kept = [
        (p, m, c)
        for p, m, c in zip(poles, orders, coeff_arrays)
        if peak and np.abs(c).max() >= 1e-10 * peak
    ]
    if kept and len(kept) < len(poles):
        coeff_arrays, resid = _fit_coeffs(
            y, t, [k[0] for k in kept], [k[1] for k in kept]
        )
        kept = [(p, m, c) for (p, m, _), c in zip(kept, coeff_arrays)]
    entries = tuple(PoleEntry(s=p, order=m, coeffs=c) for p, m, c in kept)
    status = "poor_fit" if resid > POOR_FIT_RESIDUAL else "ok"
    return PoleTable(axis=axis, entries=entries, fit_residual=resid, status=status)


@dataclass(frozen=True)
class Inversion2DResult:
    poles1: PoleTable
    poles2: PoleTable
    #: rows indexed by (pole_a, power_j), columns by (pole_b, power_k)
    amplitude_matrix: np.ndarray
    basis1: tuple[tuple[int, int], ...]
    basis2: tuple[tuple[int, int], ...]
    fit_residual: float

    def amplitude(self, a: int, b: int) -> float:
        """Total |A| between pole a of axis 1 and pole b of axis 2 (all
        polynomial powers combined)."""
        rows = [i for i, (p, _) in enumerate(self.basis1) if p == a]
        cols = [j for j, (p, _) in enumerate(self.basis2) if p == b]
        return float(np.sum(np.abs(self.amplitude_matrix[np.ix_(rows, cols)])))


def _basis_matrix(t: np.ndarray, table: PoleTable):
    cols, index = [], []
    for a, e in enumerate(table.entries):
        base = np.exp(e.s * t)
        for j in range(e.order):
            cols.append(t**j * base)
            index.append((a, j))
    return np.column_stack(cols), tuple(index)


def invert_2d(
    grid: ResponseGrid,
    method: str = "pencil",
    max_modes: int | None = None,
    svd_tol: float = 1e-8,
    pole_merge_tol: float | None = None,
    order_cluster_tol: float | None = None,
) -> Inversion2DResult:
    """Sequential 2D harmonic inversion of S(tau1, tau2).

    Pencil along tau1 per tau2-slice; slice-wise poles are clustered with
    ``pole_merge_tol`` into canonical tau1 poles; the tau2 dynamics is read
    off each canonical pole's coefficient trace; the amplitude matrix is a
    final global least squares on the separable pole basis.
    """
    if method not in ("pencil", "pade"):
        raise InvalidInputError(f"unknown method {method!r}")
    if len(grid.axes) != 2:
        raise InvalidInputError("invert_2d expects a 2-axis grid")
    ax1, ax2 = grid.axes
    t1 = ax1.samples
    t2 = ax2.samples
    n2 = t2.size

    def _invert(sig, dt, axis):
        if method == "pencil":
            return matrix_pencil_1d(
                sig, dt, max_modes=max_modes, svd_tol=svd_tol,
                order_cluster_tol=order_cluster_tol, axis=axis,
            )
        deg = max_modes if max_modes is not None else max(1, sig.size // 4)
        return pade_poles_1d(sig, dt, deg, order_cluster_tol=order_cluster_tol, axis=axis)

    # slice-wise inversion along tau1
    tables = []
    norms = np.array([la.norm(grid.values[:, j]) for j in range(n2)])
    ref = norms.max()
    used = [j for j in range(n2) if norms[j] > 1e-12 * ref]
    for j in used:
        tables.append(_invert(grid.values[:, j], ax1.dt, ax1.name))
    counts = [sum(t.orders) for t in tables]
    if counts and max(counts) - min(counts) > 1:
        raise InconsistentModelError(
            f"slice pole counts vary from {min(counts)} to {max(counts)}; "
            "use longer grids"
        )
    all_poles, weights = [], []
    for tb, j in zip(tables, used):
        for e in tb.entries:
            all_poles.append(e.s)
            weights.append(norms[j] * float(np.abs(e.coeffs).max()))
    if not all_poles:
        raise InconsistentModelError("no poles recovered along the first axis")
    all_poles = np.asarray(all_poles)
    weights = np.asarray(weights)
    span = float(np.max(np.abs(all_poles[:, None] - all_poles[None, :]))) or abs(
        all_poles[0]
    )
    if pole_merge_tol is None:
        pole_merge_tol = 1e-3 * max(span, 1.0 / (ax1.dt * t1.size))
    groups = _cluster_poles(all_poles, pole_merge_tol)
    poles_a = [
        complex(np.average(all_poles[g], weights=weights[g] + 1e-300)) for g in groups
    ]
    # pole order = the maximum multiplicity this cluster reached in any slice
    orders_a = []
    for g, p in zip(groups, poles_a):
        per_slice = []
        for tb in tables:
            m = sum(
                e.order for e in tb.entries if abs(e.s - p) < pole_merge_tol * 2
            )
            if m:
                per_slice.append(m)
        orders_a.append(max(per_slice) if per_slice else 1)

    table1_raw = PoleTable(
        axis=ax1.name,
        entries=tuple(
            PoleEntry(s=p, order=m, coeffs=np.zeros(m)) for p, m in zip(poles_a, orders_a)
        ),
        fit_residual=0.0,
    )
    # truncated least squares: near-degenerate pole bases otherwise blow up
    # the coefficients through cancellation
    Phi1, basis1 = _basis_matrix(t1, table1_raw)
    traces, *_ = la.lstsq(Phi1, grid.values, cond=1e-10)  # (n_basis1, n2)

    # tau2 poles from the coefficient traces
    all2, w2 = [], []
    tables2 = []
    for row in traces:
        if la.norm(row) < 1e-12 * la.norm(traces):
            tables2.append(None)
            continue
        tb = _invert(row, ax2.dt, ax2.name)
        tables2.append(tb)
        for e in tb.entries:
            all2.append(e.s)
            w2.append(float(np.abs(e.coeffs).max()))
    if not all2:
        raise InconsistentModelError("no poles recovered along the second axis")
    all2 = np.asarray(all2)
    w2 = np.asarray(w2)
    groups2 = _cluster_poles(all2, pole_merge_tol)
    poles_b = [complex(np.average(all2[g], weights=w2[g] + 1e-300)) for g in groups2]
    orders_b = []
    for g, p in zip(groups2, poles_b):
        per_trace = []
        for tb in tables2:
            if tb is None:
                continue
            m = sum(e.order for e in tb.entries if abs(e.s - p) < pole_merge_tol * 2)
            if m:
                per_trace.append(m)
        orders_b.append(max(per_trace) if per_trace else 1)

    table2_raw = PoleTable(
        axis=ax2.name,
        entries=tuple(
            PoleEntry(s=p, order=m, coeffs=np.zeros(m)) for p, m in zip(poles_b, orders_b)
        ),
        fit_residual=0.0,
    )
    Phi2, basis2 = _basis_matrix(t2, table2_raw)

    # global separable least squares: S = Phi1 A Phi2^T
    A, *_ = la.lstsq(Phi1, grid.values, cond=1e-10)
    A = la.lstsq(Phi2, A.T, cond=1e-10)[0].T
    model = Phi1 @ A @ Phi2.T
    ref_norm = la.norm(grid.values)
    resid = float(la.norm(model - grid.values) / ref_norm) if ref_norm else 0.0

    # fill PoleTable coefficient fields from the amplitude matrix marginals
    def _with_coeffs(raw: PoleTable, basis, marg):
        entries = []
        for a, e in enumerate(raw.entries):
            idx = [i for i, (p, _) in enumerate(basis) if p == a]
            c = marg[idx]
            entries.append(PoleEntry(s=e.s, order=e.order, coeffs=c))
        return PoleTable(axis=raw.axis, entries=tuple(entries), fit_residual=resid,
                         status="poor_fit" if resid > POOR_FIT_RESIDUAL else "ok")

    # marginal coefficients: model evaluated at the other delay = 0
    marg1 = A @ Phi2[0]
    marg2 = A.T @ Phi1[0]
    table1 = _with_coeffs(table1_raw, basis1, marg1)
    table2 = _with_coeffs(table2_raw, basis2, marg2)
    return Inversion2DResult(
        poles1=table1,
        poles2=table2,
        amplitude_matrix=A,
        basis1=basis1,
        basis2=basis2,
        fit_residual=resid,
    )


def laplace_map(
    poles1: PoleTable,
    poles2: PoleTable,
    amplitude_matrix: np.ndarray,
    s1_axis,
    s2_axis,
    im_offset: tuple[float, float] | None = None,
    basis1=None,
    basis2=None,
) -> LaplaceMap2D:
    """Evaluate the closed-form pole model |S~(s1, s2)| on a real decay-rate
    grid, instead of numerically inverting the ill-posed transform. A term
    t^j e^{lambda t} contributes j!/(z - lambda)^{j+1} with z = -s + i*omega.

    By default each pole factor is evaluated at its own imaginary part
    (omega = Im lambda), so every decay channel is exactly resonant at its
    rate coordinate regardless of its oscillation frequency. Passing
    ``im_offset = (o1, o2)`` instead fixes a single frequency sheet.
    """
    s1 = np.asarray(s1_axis, dtype=float)
    s2 = np.asarray(s2_axis, dtype=float)
    matched = im_offset is None
    o1, o2 = (0.0, 0.0) if matched else im_offset
    if basis1 is None:
        basis1 = [(a, j) for a, e in enumerate(poles1.entries) for j in range(e.order)]
    if basis2 is None:
        basis2 = [(b, k) for b, e in enumerate(poles2.entries) for k in range(e.order)]
    A = np.asarray(amplitude_matrix, dtype=complex)
    if A.shape != (len(basis1), len(basis2)):
        raise InvalidInputError("amplitude matrix does not match the pole bases")

    flagged = set()
    from math import factorial

    def _factors(s_axis, o, basis, table, axis_tag):
        F = np.empty((len(basis), s_axis.size), dtype=complex)
        for i, (a, j) in enumerate(basis):
            lam = table.entries[a].s
            z = -s_axis + 1j * (lam.imag if matched else o)
            d = z - lam
            small = np.abs(d) < 1e-12
            if np.any(small):
                if axis_tag == 0:
                    flagged.update((int(k), -1) for k in np.flatnonzero(small))
                else:
                    flagged.update((-1, int(k)) for k in np.flatnonzero(small))
                d = np.where(small, 1e-12, d)
            F[i] = factorial(j) / d ** (j + 1)
        return F

    F1 = _factors(s1, o1, basis1, poles1, 0)
    F2 = _factors(s2, o2, basis2, poles2, 1)
    vals = np.abs(F1.T @ A @ F2)
    return LaplaceMap2D(
        s1_axis=s1,
        s2_axis=s2,
        values=vals,
        source="pole-model",
        im_offset=(float(o1), float(o2)),
        sheet="matched" if matched else "fixed",
        flagged=tuple(sorted(flagged)),
    )


def tikhonov_ilt_2d(
    grid: ResponseGrid,
    s1_axis,
    s2_axis,
    lam_reg: float,
    im_offset: tuple[float, float] | None = None,
) -> LaplaceMap2D:
    """Direct double-Laplace inversion by non-negative least squares with an
    l2 (Tikhonov) penalty. The signal is demodulated at ``im_offset`` first
    so the kernel is purely decaying.
    """
    if lam_reg <= 0:
        raise InvalidInputError("lam_reg must be positive")
    if len(grid.axes) != 2:
        raise InvalidInputError("tikhonov_ilt_2d expects a 2-axis grid")
    s1 = np.asarray(s1_axis, dtype=float)
    s2 = np.asarray(s2_axis, dtype=float)
    t1 = grid.axes[0].samples
    t2 = grid.axes[1].samples
    if im_offset is None:
        # dominant frequency per axis from the FFT of the edge slices
        def _freq(sig, dt):
            spec = np.fft.fft(sig)
            k = int(np.argmax(np.abs(spec)))
            return float(np.fft.fftfreq(sig.size, dt)[k] * 2 * np.pi)

        im_offset = (_freq(grid.values[:, 0], grid.axes[0].dt),
                     _freq(grid.values[0, :], grid.axes[1].dt))
    o1, o2 = im_offset
    demod = grid.values * np.exp(-1j * o1 * t1)[:, None] * np.exp(-1j * o2 * t2)[None, :]
    y = demod.real.ravel()

    K1 = np.exp(-np.outer(t1, s1))
    K2 = np.exp(-np.outer(t2, s2))
    K = np.kron(K1, K2)
    sv = la.svd(K, compute_uv=False)
    if sv[0] / max(sv[-1], 1e-300) > 1e18:
        raise ConditioningError(
            "double-Laplace kernel numerically singular; use a coarser s-grid"
        )
    n_cols = K.shape[1]
    Kaug = np.vstack([K, np.sqrt(lam_reg) * np.eye(n_cols)])
    yaug = np.concatenate([y, np.zeros(n_cols)])
    from scipy.optimize import nnls

    x, _ = nnls(Kaug, yaug)
    vals = x.reshape(s1.size, s2.size)
    return LaplaceMap2D(
        s1_axis=s1,
        s2_axis=s2,
        values=vals,
        source="direct-transform",
        im_offset=(float(o1), float(o2)),
    )


def cross_peak_intensity(
    channel_a: int | float,
    channel_b: int | float,
    result: Inversion2DResult | None = None,
    map2d: LaplaceMap2D | None = None,
    window: tuple[float, float] | None = None,
) -> dict:
    """Cross-peak strength between two decay channels.

    From an inversion result: sum of |A_ab| + |A_ba| over the two pole pairs
    (channels given as pole indices). From a map: integral of |S~| over the
    rectangular window centered at (rate_a, rate_b) plus its mirror
    (channels given as decay rates, window = half-widths). Whatever is
    available is reported.
    """
    if result is None and map2d is None:
        raise InvalidInputError("need an inversion result or a map")
    out: dict = {}
    if result is not None:
        a, b = int(channel_a), int(channel_b)
        amp = result.amplitude(a, b)
        if a < len(result.poles2.entries) and b < len(result.poles1.entries):
            amp += result.amplitude(b, a)
        out["amplitude"] = amp
    if map2d is not None:
        ra, rb = float(channel_a), float(channel_b)
        if window is None:
            w1 = 0.1 * (map2d.s1_axis[-1] - map2d.s1_axis[0])
            w2 = 0.1 * (map2d.s2_axis[-1] - map2d.s2_axis[0])
            window = (w1, w2)

        def _mass(c1, c2):
            m1 = np.abs(map2d.s1_axis - c1) <= window[0]
            m2 = np.abs(map2d.s2_axis - c2) <= window[1]
            if not (m1.any() and m2.any()):
                return 0.0
            sub = map2d.values[np.ix_(m1, m2)]
            if sub.shape[0] > 1 and sub.shape[1] > 1:
                return float(
                    np.trapezoid(
                        np.trapezoid(sub, map2d.s2_axis[m2], axis=1),
                        map2d.s1_axis[m1],
                    )
                )
            return float(sub.sum())

        cross = _mass(ra, rb) + (_mass(rb, ra) if rb != ra else 0.0)
        out["window_integral"] = cross
        # contamination: fraction of a diagonal peak's windowed mass lying
        # inside the cross window
        def _olap(center, cross_center, w):
            lo, hi = center - w, center + w
            lo2, hi2 = cross_center - w, cross_center + w
            return max(0.0, min(hi, hi2) - max(lo, lo2))

        for c in (ra, rb):
            if ra == rb:
                break
            diag = _mass(c, c)
            if diag <= 0:
                continue
            # geometric overlap of the cross window with the diagonal window
            frac = (
                _olap(c, ra, window[0]) * _olap(c, rb, window[1])
                / (4 * window[0] * window[1])
            )
            if frac > 0.1:
                warnings.warn(
                    f"cross-peak window overlaps the diagonal peak at {c:g} "
                    f"by {100 * frac:.0f}% of its area",
                    ContaminationWarning,
                )
    return out
