"""Named measurement protocols and hardware-design metrics.

Pipelines: coherence-order projection (phase cycling), the 2D decay-decay
correlation map with its isolation figure of merit, frequency-decay-frequency
tomography, parameter sweeps and the insulation verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import (
    AliasingError,
    ChannelAmbiguityError,
    InvalidInputError,
    ProtocolError,
    WfsLabError,
)
from .inversion import (
    Inversion2DResult,
    LaplaceMap2D,
    PoleTable,
    cross_peak_intensity,
    invert_2d,
    laplace_map,
    matrix_pencil_1d,
)
from .models import AssembledModel, rotating_frame, hamiltonian_to_liouvillian
from .operator import Operator
from .response import (
    Axis,
    ResponseGrid,
    photon_echo_2d,
    three_pulse_3d,
)


def hfs_project(grid: ResponseGrid, p: int, phase_axis: str = "phi") -> ResponseGrid:
    """Extract the coherence-order-p component from a phase-cycled signal:
    S_p = (1/M) sum_j S(.., Phi_j) e^{-i p Phi_j}.

    Exact for band-limited phase content by discrete orthogonality; requires
    |p| <= (M - 1) / 2.
    """
    k = grid.axis_index(phase_axis)
    phi = grid.axes[k].samples
    M = phi.size
    if M < 2 * abs(p) + 1:
        raise AliasingError(
            f"{M} phase samples cannot isolate coherence order {p}"
        )
    kernel = np.exp(-1j * p * phi) / M
    values = np.tensordot(grid.values, kernel, axes=([k], [0]))
    axes = tuple(ax for i, ax in enumerate(grid.axes) if i != k)
    meta = dict(grid.metadata)
    meta["hodge_order"] = p
    return ResponseGrid(axes=axes, values=values, metadata=meta)


@dataclass(frozen=True)
class IsolationReport:
    f_iso: float
    cross_integral: float
    channel_poles: tuple[complex, complex] | None
    window: tuple[float, float] | None
    method: str  # "amplitude" | "map"
    cross_amplitude: float = 0.0

    def __post_init__(self):
        expected = 1.0 / (1.0 + self.cross_integral)
        if abs(self.f_iso - expected) > 1e-15 * max(1.0, expected):
            raise InvalidInputError("f_iso must equal 1/(1 + cross_integral)")

    def to_json_dict(self) -> dict:
        return {
            "f_iso": self.f_iso,
            "cross_integral": self.cross_integral,
            "cross_amplitude": self.cross_amplitude,
            "channel_poles": None
            if self.channel_poles is None
            else [[p.real, p.imag] for p in self.channel_poles],
            "window": None if self.window is None else list(self.window),
            "method": self.method,
        }


def f_iso(cross_integral: float) -> float:
    """Isolation figure of merit 1/(1 + cross-peak integral)."""
    if cross_integral < 0:
        raise InvalidInputError("cross integral must be >= 0")
    return 1.0 / (1.0 + cross_integral)


def _channel_rates(result: Inversion2DResult, channels):
    """Identify the clean (slowest) and dirty (fastest) decay channels.

    ``channels`` may give the two rates explicitly; otherwise the smallest
    and largest |Re s| are used, requiring > 5% separation.
    """
    rates = np.abs(result.poles1.poles.real)
    if rates.size == 0:
        raise ProtocolError("no poles to assign channels from")
    if channels is not None:
        return float(channels[0]), float(channels[1])
    r_clean, r_dirty = float(rates.min()), float(rates.max())
    if r_dirty == 0 or (r_dirty - r_clean) < 0.05 * r_dirty:
        raise ChannelAmbiguityError(
            f"channel rates {r_clean:.4g} and {r_dirty:.4g} are within 5%; "
            "assign channels explicitly"
        )
    return r_clean, r_dirty


def _split_channels(table: PoleTable, r_clean: float, r_dirty: float):
    """Assign every pole to whichever channel rate it is closer to."""
    clean, dirty = [], []
    for i, e in enumerate(table.entries):
        r = abs(e.s.real)
        (clean if abs(r - r_clean) <= abs(r - r_dirty) else dirty).append(i)
    return clean, dirty


@dataclass(frozen=True)
class WfsResult:
    echo: ResponseGrid
    inversion: Inversion2DResult
    map2d: LaplaceMap2D
    report: IsolationReport

    @property
    def poles1(self) -> PoleTable:
        return self.inversion.poles1

    @property
    def poles2(self) -> PoleTable:
        return self.inversion.poles2


def wfs_map(
    model: AssembledModel,
    tau1_grid,
    tau2_grid,
    channels: tuple[float, float] | None = None,
    window: tuple[float, float] | None = None,
    s_axes=None,
    svd_tol: float = 1e-9,
    max_modes: int | None = 8,
    pole_merge_tol: float | None = None,
    order_cluster_tol: float | None = None,
    metric: str = "amplitude",
) -> WfsResult:
    """The decay-decay correlation pipeline: echo synthesis, sequential 2D
    harmonic inversion, pole-model map, cross-peak metric, isolation report.

    ``metric`` chooses whether the reported cross_integral comes from the
    window-free amplitude matrix (default; immune to the diagonal peaks'
    power-law tails leaking into the cross window) or from the windowed map
    integral.
    """
    if metric not in ("map", "amplitude"):
        raise InvalidInputError(f"unknown metric {metric!r}")
    L, space = model.liouvillian()
    echo = photon_echo_2d(
        L, model.dipole, model.ground_density(), tau1_grid, tau2_grid, space
    )
    inv = invert_2d(
        echo, svd_tol=svd_tol, max_modes=max_modes,
        pole_merge_tol=pole_merge_tol, order_cluster_tol=order_cluster_tol,
    )
    r_clean, r_dirty = _channel_rates(inv, channels)
    span = max(r_dirty, 1.0)
    if s_axes is None:
        lo = max(min(r_clean, r_dirty) * 0.1, 1e-3 * span)
        hi = r_dirty * 1.7 + 0.3 * span
        s = np.linspace(lo, hi, 200)
        s_axes = (s, s)
    map2d = laplace_map(
        inv.poles1, inv.poles2, inv.amplitude_matrix, s_axes[0], s_axes[1],
        basis1=inv.basis1, basis2=inv.basis2,
    )
    if window is None:
        gap = abs(r_dirty - r_clean)
        w = max(0.1 * gap, 2 * (s_axes[0][1] - s_axes[0][0]))
        window = (w, w)

    cross = cross_peak_intensity(
        r_clean, r_dirty, map2d=map2d, window=window
    )["window_integral"]

    # window-free variant from the amplitude matrix: all pole pairs whose
    # rates land in opposite channels
    a_clean, a_dirty = _split_channels(inv.poles1, r_clean, r_dirty)
    b_clean, b_dirty = _split_channels(inv.poles2, r_clean, r_dirty)
    amp = sum(inv.amplitude(a, b) for a in a_clean for b in b_dirty)
    amp += sum(inv.amplitude(a, b) for a in a_dirty for b in b_clean)

    integral = cross if metric == "map" else amp
    pole_pair = None
    if a_clean and a_dirty:
        pole_pair = (
            inv.poles1.entries[a_clean[0]].s,
            inv.poles1.entries[a_dirty[0]].s,
        )
    report = IsolationReport(
        f_iso=f_iso(integral),
        cross_integral=integral,
        channel_poles=pole_pair,
        window=window,
        method=metric,
        cross_amplitude=amp,
    )
    return WfsResult(echo=echo, inversion=inv, map2d=map2d, report=report)


@dataclass(frozen=True)
class HwhResult:
    omega1: np.ndarray
    s2_axis: np.ndarray  # amplitude-decay-rate units; first cell is s2 = 0
    omega3: np.ndarray
    tensor: np.ndarray  # complex sticks, shape (n1, n_s2, n3)
    peaks: tuple[tuple[float, float, float, int], ...]  # (w1, s2, w3, order)
    flagged_pixels: int
    analyzed_pixels: int
    carrier: float

    def magnitude(self) -> np.ndarray:
        return np.abs(self.tensor)

    def s2_marginal(self) -> np.ndarray:
        """Complex sum over the decay axis; equals the conventional 2D
        Fourier map at zero waiting time."""
        return self.tensor.sum(axis=1)


def hwh_tomography(
    model: AssembledModel,
    t1_grid,
    t2_grid,
    t3_grid,
    carrier: float | None = None,
    n_s2: int = 48,
    pixel_threshold: float = 1e-4,
    svd_tol: float = 1e-8,
    max_modes: int = 6,
    max_flagged_frac: float = 0.2,
) -> HwhResult:
    """Frequency-decay-frequency tomography.

    Fourier transform along t1 and t3; on every significant (w1, w3) pixel,
    harmonic inversion of the t2 transient; each recovered pole deposits its
    complex amplitude at the nearest cell of a log-spaced decay axis.

    The s2 axis is calibrated in per-channel amplitude-decay units: a t2
    pole |a><b| decays at gamma_a + gamma_b, where the bra channel b is the
    one excited during t1 at this pixel. Its rate — half the slowest
    nonzero pole, i.e. the pixel's own population decay — is subtracted, so
    each channel appears at its amplitude rate gamma_a (the pixel's own
    channel at gamma_b, any admixed channel at its gamma). Stationary
    (ground) poles go to the explicit s2 = 0 bin. Pixels whose inversion
    fails are flagged; too many flagged pixels fail the protocol.
    """
    H = model.hamiltonian
    exc = model.excitations
    if carrier is None:
        # brightness-agnostic default: median single-excitation energy
        # (robust against a detuned minority level dragging the frame off
        # the main resonance)
        diag = H.entries.diagonal().real
        ones = [i for i, e in enumerate(exc) if e == 1]
        carrier = float(np.median(diag[ones])) if ones else 0.0
    H_rot = rotating_frame(H, exc, carrier)
    L, space = hamiltonian_to_liouvillian(H_rot, exc)
    rho0 = model.ground_density()

    sig = three_pulse_3d(L, model.dipole, rho0, t1_grid, t2_grid, t3_grid, space)
    n1 = sig.axes[0].samples.size
    n3 = sig.axes[2].samples.size
    dt1, dt3 = sig.axes[0].dt, sig.axes[2].dt
    spec = np.fft.fftshift(np.fft.fft(sig.values, axis=0), axes=0)
    spec = np.fft.fftshift(np.fft.fft(spec, axis=2), axes=2)
    w1 = np.fft.fftshift(np.fft.fftfreq(n1, dt1)) * 2 * np.pi
    w3 = np.fft.fftshift(np.fft.fftfreq(n3, dt3)) * 2 * np.pi

    zero_map = spec[:, 0, :]
    ref = np.abs(zero_map).max()
    pix = np.argwhere(np.abs(zero_map) > pixel_threshold * ref)
    if pix.size == 0:
        raise ProtocolError("no pixels above the analysis threshold")

    dt2 = sig.axes[1].dt
    pixel_poles: dict[tuple[int, int], list] = {}
    all_s2 = []
    flagged = 0
    for i, k in pix:
        transient = spec[i, :, k]
        try:
            tb = matrix_pencil_1d(
                transient, dt2, max_modes=max_modes, svd_tol=svd_tol, axis="t2"
            )
            if tb.status != "ok":
                flagged += 1
                continue
        except WfsLabError:
            flagged += 1
            continue
        rates = np.array([-e.s.real for e in tb.entries])
        floor = 1e-6 * rates.max() if rates.size and rates.max() > 0 else 0.0
        nonzero = rates[rates > max(floor, 1e-9)]
        ref = 0.5 * nonzero.min() if nonzero.size else 0.0
        entries = []
        for e, rate in zip(tb.entries, rates):
            s2_val = 0.0 if rate <= max(floor, 1e-9) else rate - ref
            entries.append((s2_val, e))
            if s2_val > 0:
                all_s2.append(s2_val)
        pixel_poles[(int(i), int(k))] = entries
    if flagged > max_flagged_frac * len(pix):
        raise ProtocolError(
            f"{flagged}/{len(pix)} pixel inversions failed; "
            "refine the t2 grid or tolerances"
        )

    if all_s2:
        lo, hi = 0.1 * min(all_s2), 10.0 * max(all_s2)
    else:
        lo, hi = 0.1, 10.0
    s2 = np.concatenate([[0.0], np.geomspace(lo, hi, n_s2 - 1)])

    tensor = np.zeros((n1, n_s2, n3), dtype=complex)
    peaks = []
    for (i, k), entries in pixel_poles.items():
        for s2_val, e in entries:
            cell = int(np.argmin(np.abs(s2 - s2_val)))
            tensor[i, cell, k] += e.coeffs[0]
            peaks.append((float(w1[i]), float(s2[cell]), float(w3[k]), e.order,
                          float(np.abs(e.coeffs[0]))))
    peaks.sort(key=lambda x: -x[4])
    peak_list = tuple((a, b, c, d) for a, b, c, d, _ in peaks)
    return HwhResult(
        omega1=w1,
        s2_axis=s2,
        omega3=w3,
        tensor=tensor,
        peaks=peak_list,
        flagged_pixels=flagged,
        analyzed_pixels=len(pix),
        carrier=carrier,
    )


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    values: np.ndarray
    metrics: np.ndarray
    reports: tuple[IsolationReport, ...]
    fit: dict | None
    notes: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "values": self.values.tolist(),
            "metrics": self.metrics.tolist(),
            "fit": self.fit,
            "notes": list(self.notes),
            "reports": [r.to_json_dict() for r in self.reports],
        }


def sweep(
    model_family,
    parameter: str,
    values,
    tau1_grid,
    tau2_grid,
    metric: str = "cross_peak",
    fit: str | None = None,
    n_jobs: int = 1,
    **wfs_kwargs,
) -> SweepResult:
    """Evaluate the isolation pipeline along a parameter axis.

    ``model_family(value)`` must return an AssembledModel. ``metric`` is
    either the window-free cross-peak amplitude ("cross_peak") or "f_iso".
    Optional fits: "power" (log-log straight line, reports the exponent) or
    "exponential" (log-linear, reports the rate), each with r^2. Points can
    be evaluated on ``n_jobs`` threads; assembly stays in value order, so
    the result is independent of scheduling.
    """
    if metric not in ("cross_peak", "f_iso"):
        raise InvalidInputError(f"unknown sweep metric {metric!r}")
    if fit not in (None, "power", "exponential"):
        raise InvalidInputError(f"unknown fit {fit!r}")
    values = np.asarray(values, dtype=float)
    if fit is not None and values.size < 4:
        raise InvalidInputError("fits need at least 4 sweep values")

    def _point(v):
        return wfs_map(model_family(v), tau1_grid, tau2_grid, **wfs_kwargs)

    if n_jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_point, values))
    else:
        results = [_point(v) for v in values]
    notes = []
    reports = [r.report for r in results]
    metrics = np.asarray(
        [
            r.report.cross_amplitude if metric == "cross_peak" else r.report.f_iso
            for r in results
        ],
        dtype=float,
    )

    fit_out = None
    if fit is not None:
        if np.any(metrics <= 0) or (fit == "power" and np.any(values <= 0)):
            notes.append("fit skipped: non-positive metric or parameter values")
        elif np.ptp(metrics) == 0:
            notes.append("fit skipped: metric is constant across the sweep")
        else:
            x = np.log(values) if fit == "power" else values
            y = np.log(metrics)
            slope, intercept = np.polyfit(x, y, 1)
            pred = slope * x + intercept
            ss_res = float(np.sum((y - pred) ** 2))
            ss_tot = float(np.sum((y - y.mean()) ** 2))
            r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")
            key = "exponent" if fit == "power" else "rate"
            fit_out = {"model": fit, key: float(slope), "r2": r2}
    return SweepResult(
        parameter=parameter,
        values=values,
        metrics=metrics,
        reports=tuple(reports),
        fit=fit_out,
        notes=tuple(notes),
    )


def insulation_certificate(
    reports,
    sweep_result: SweepResult | None = None,
    insulated_f_iso: float = 0.999,
    mixed_f_iso: float = 0.9,
    growth_slope: float = 0.1,
) -> dict:
    """Aggregate isolation evidence into one verdict:
    insulated | weight-mixed | indeterminate.
    """
    reports = list(reports)
    if not reports:
        raise InvalidInputError("need at least one isolation report")
    min_f = min(r.f_iso for r in reports)
    evidence = [f"min F_iso = {min_f:.6g} over {len(reports)} report(s)"]

    growing = False
    if sweep_result is not None and sweep_result.fit is not None:
        slope = sweep_result.fit.get("exponent", sweep_result.fit.get("rate", 0.0))
        r2 = sweep_result.fit.get("r2", 0.0)
        growing = slope > growth_slope and r2 > 0.5
        evidence.append(
            f"sweep fit: {sweep_result.fit['model']} slope {slope:.3g}, r2 {r2:.3g}"
        )
    elif sweep_result is not None:
        evidence.append("sweep present, no usable fit (flat or floored metric)")

    if min_f >= insulated_f_iso and not growing:
        verdict = "insulated"
    elif min_f < mixed_f_iso and not growing:
        verdict = "weight-mixed"
    elif min_f >= insulated_f_iso and growing:
        verdict = "indeterminate"
        evidence.append("conflict: high F_iso but growing leakage under sweep")
    else:
        verdict = "indeterminate"
    return {"verdict": verdict, "min_f_iso": min_f, "evidence": evidence}
