"""Command-line front end.

Subcommands: model, respond, invert, protocol, sweep, plot, run. Exit
codes: 0 success, 2 configuration error, 3 numerical failure, 4 protocol
verdict "weight-mixed" under --certify.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__, config as config_mod, plotting
from .errors import ConfigError, WfsLabError
from .inversion import invert_2d, matrix_pencil_1d
from .models import PRESETS, assemble
from .protocols import (
    hfs_project,
    hwh_tomography,
    insulation_certificate,
    sweep as run_sweep,
    wfs_map,
)
from .response import linear_response, phase_cycled, photon_echo_2d

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CERTIFY = 4

DEFAULT_GRIDS = {
    "tau1": (0.0, 0.5, 0.004),
    "tau2": (0.0, 0.5, 0.004),
    "t": (0.0, 1.0, 0.004),
    "t1": (0.0, 64 * (2 * np.pi / 160), 2 * np.pi / 160),
    "t2": (0.0, 0.64, 0.005),
    "t3": (0.0, 64 * (2 * np.pi / 160), 2 * np.pi / 160),
}


def _default_jobs() -> int:
    raw = os.environ.get("WFS_LAB_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _grid(cfg, axis: str) -> np.ndarray:
    spec = cfg.grid(axis) or DEFAULT_GRIDS[axis]
    start, stop, step = spec
    return np.arange(start, stop, step)


def _json_dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _config_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _channels(cfg):
    raw = cfg.get("protocol", "channels", default=None)
    if raw is None:
        return None
    try:
        a, b = (float(x) for x in raw.split(","))
    except ValueError:
        raise ConfigError(f"[protocol] channels = {raw!r}: expected two numbers")
    return (a, b)


# ---------------------------------------------------------------------------
# protocol executors; each returns a report dict and writes artifacts


def _exec_linear(cfg, outdir: Path) -> dict:
    model = assemble(cfg.model_spec())
    L, space = model.liouvillian()
    t = _grid(cfg, "t")
    grid = linear_response(L, model.dipole, model.ground_density(), t, space)
    grid.to_csv(outdir / "response.csv", outdir / "response.json")
    table = matrix_pencil_1d(grid.values, float(t[1] - t[0]),
                             **{k: v for k, v in cfg.inversion_kwargs().items()
                                if k in ("svd_tol", "max_modes", "order_cluster_tol")})
    _json_dump(table.to_json_dict(), outdir / "poles.json")
    return {
        "protocol": "linear",
        "n_poles": len(table.entries),
        "poles": table.to_json_dict(),
    }


def _exec_wfs(cfg, outdir: Path, plots: bool) -> dict:
    model = assemble(cfg.model_spec())
    tau1 = _grid(cfg, "tau1")
    tau2 = _grid(cfg, "tau2")
    kwargs = cfg.inversion_kwargs()
    metric = cfg.get("protocol", "metric", default="amplitude")
    if metric == "cross_peak":
        metric = "amplitude"
    res = wfs_map(model, tau1, tau2, channels=_channels(cfg), metric=metric, **kwargs)
    res.echo.to_csv(outdir / "echo.csv", outdir / "echo.json")
    res.map2d.to_csv(outdir / "map.csv", outdir / "map.json")
    _json_dump(res.inversion.poles1.to_json_dict(), outdir / "poles_tau1.json")
    _json_dump(res.inversion.poles2.to_json_dict(), outdir / "poles_tau2.json")
    if plots:
        (outdir / "map.svg").write_text(
            plotting.svg_heatmap(res.map2d.values, res.map2d.s1_axis,
                                 res.map2d.s2_axis, title="laplace map |S~(s1,s2)|")
        )
    return {"protocol": "wfs", "report": res.report.to_json_dict(),
            "map_peak": list(res.map2d.peak())}


def _exec_hfs(cfg, outdir: Path) -> dict:
    model = assemble(cfg.model_spec())
    L, space = model.liouvillian()
    tau1 = _grid(cfg, "tau1")
    tau2 = _grid(cfg, "tau2")
    m_cycle = cfg.get("protocol", "phase_steps", default=8, cast=int)
    phi = np.linspace(0.0, 2 * np.pi, m_cycle, endpoint=False)

    def signal(phases):
        return photon_echo_2d(L, model.dipole, model.ground_density(),
                              tau1, tau2, space, phases=phases)

    cycled = phase_cycled(signal, phi)
    p_max = (m_cycle - 1) // 2
    orders = {}
    for p in range(-p_max, p_max + 1):
        comp = hfs_project(cycled, p)
        comp.to_csv(outdir / f"order_{p:+d}.csv", outdir / f"order_{p:+d}.json")
        orders[str(p)] = float(np.abs(comp.values).max())
    return {"protocol": "hfs", "phase_steps": m_cycle, "order_amplitudes": orders}


def _exec_hwh(cfg, outdir: Path, plots: bool) -> dict:
    model = assemble(cfg.model_spec())
    t1, t2, t3 = (_grid(cfg, a) for a in ("t1", "t2", "t3"))
    kwargs = {k: v for k, v in cfg.inversion_kwargs().items()
              if k in ("svd_tol", "max_modes")}
    res = hwh_tomography(model, t1, t2, t3, **kwargs)
    np.savez(outdir / "hwh_tensor.npz", omega1=res.omega1, s2=res.s2_axis,
             omega3=res.omega3, tensor=res.tensor)
    _json_dump(
        {
            "carrier_mev": res.carrier,
            "flagged_pixels": res.flagged_pixels,
            "analyzed_pixels": res.analyzed_pixels,
            "peaks": [list(p) for p in res.peaks[:50]],
        },
        outdir / "hwh_peaks.json",
    )
    if plots:
        (outdir / "hwh_montage.svg").write_text(
            plotting.svg_montage(res.tensor, res.omega1, res.s2_axis, res.omega3,
                                 title="|S~(w1, s2, w3)| slices")
        )
    return {"protocol": "hwh", "carrier_mev": res.carrier,
            "flagged_pixels": res.flagged_pixels,
            "analyzed_pixels": res.analyzed_pixels,
            "strongest_peaks": [list(p) for p in res.peaks[:10]]}


def _exec_sweep(cfg, outdir: Path, plots: bool, jobs: int) -> dict:
    spec = cfg.model_spec()
    parameter = cfg.require("protocol", "parameter")
    raw_values = cfg.require("protocol", "values")
    try:
        values = [float(x) for x in raw_values.split(",")]
    except ValueError:
        raise ConfigError(f"[protocol] values = {raw_values!r}: expected numbers")
    metric = cfg.get("protocol", "metric", default="cross_peak")
    fit = cfg.get("protocol", "fit", default=None)

    def family(v):
        params = dict(spec.params)
        params[parameter] = float(v)
        return assemble(type(spec)(kind=spec.kind, params=params,
                                   disorder_seed=spec.disorder_seed))

    tau1 = _grid(cfg, "tau1")
    tau2 = _grid(cfg, "tau2")
    res = run_sweep(family, parameter, values, tau1, tau2, metric=metric,
                    fit=fit, n_jobs=jobs, channels=_channels(cfg),
                    **cfg.inversion_kwargs())
    _json_dump(res.to_json_dict(), outdir / "sweep.json")
    if plots and np.all(res.metrics > 0) and np.all(res.values > 0):
        ann = ""
        if res.fit:
            key = "exponent" if "exponent" in res.fit else "rate"
            ann = f"{res.fit['model']} {key}={res.fit[key]:.3f} r2={res.fit['r2']:.4f}"
        (outdir / "sweep.svg").write_text(
            plotting.svg_line(res.values, res.metrics, title=f"sweep {parameter}",
                              loglog=True, annotation=ann)
        )
    return {"protocol": "sweep", "sweep": res.to_json_dict()}


def _execute(cfg, outdir: Path, plots: bool, jobs: int) -> dict:
    name = cfg.protocol
    if name == "linear":
        return _exec_linear(cfg, outdir)
    if name == "wfs":
        return _exec_wfs(cfg, outdir, plots)
    if name == "hfs":
        return _exec_hfs(cfg, outdir)
    if name == "hwh":
        return _exec_hwh(cfg, outdir, plots)
    return _exec_sweep(cfg, outdir, plots, jobs)


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_model(args) -> int:
    if args.action == "dump":
        if args.kind not in PRESETS:
            raise ConfigError(f"unknown preset kind {args.kind!r}; "
                              f"known: {sorted(PRESETS)}")
        payload = {"kind": args.kind, "params": PRESETS[args.kind]}
    else:  # build
        cfg = config_mod.load(args.config)
        model = assemble(cfg.model_spec())
        payload = {
            "kind": cfg.model_spec().kind,
            "params": cfg.model_spec().params,
            "hamiltonian": model.hamiltonian.to_json_dict(),
            "dipole": model.dipole.to_json_dict(),
            "excitations": list(model.excitations),
        }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_respond(args) -> int:
    cfg = config_mod.load(args.config)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    model = assemble(cfg.model_spec())
    L, space = model.liouvillian()
    if cfg.protocol == "linear":
        t = _grid(cfg, "t")
        grid = linear_response(L, model.dipole, model.ground_density(), t, space)
    else:
        grid = photon_echo_2d(L, model.dipole, model.ground_density(),
                              _grid(cfg, "tau1"), _grid(cfg, "tau2"), space)
    grid.to_csv(outdir / "response.csv", outdir / "response.json")
    return EXIT_OK


def _cmd_invert(args) -> int:
    from .response import ResponseGrid

    grid = ResponseGrid.from_csv(args.input, args.sidecar)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = config_mod.load(args.config) if args.config else None
    kwargs = cfg.inversion_kwargs() if cfg else {}
    if len(grid.axes) == 1:
        table = matrix_pencil_1d(
            grid.values, grid.axes[0].dt,
            **{k: v for k, v in kwargs.items()
               if k in ("svd_tol", "max_modes", "order_cluster_tol")})
        _json_dump(table.to_json_dict(), outdir / "poles.json")
    else:
        res = invert_2d(grid, **kwargs)
        _json_dump(res.poles1.to_json_dict(), outdir / "poles_tau1.json")
        _json_dump(res.poles2.to_json_dict(), outdir / "poles_tau2.json")
    return EXIT_OK


def _cmd_plot(args) -> int:
    path = Path(args.input)
    if path.suffix == ".json":
        payload = json.loads(path.read_text())
        if "sweep" in payload:
            payload = payload["sweep"]
        if "values" in payload and "metrics" in payload:
            ann = ""
            fit = payload.get("fit")
            if fit:
                key = "exponent" if "exponent" in fit else "rate"
                ann = f"{fit['model']} {key}={fit[key]:.3f} r2={fit['r2']:.4f}"
            svg = plotting.svg_line(payload["values"], payload["metrics"],
                                    title="sweep", loglog=True, annotation=ann)
        else:
            raise ConfigError(f"unknown JSON schema in {path}")
    elif path.suffix == ".csv":
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        if data.ndim != 2 or data.shape[1] != 3:
            raise ConfigError(f"unknown CSV schema in {path}; expected s1,s2,value")
        s1 = np.unique(data[:, 0])
        s2 = np.unique(data[:, 1])
        vals = data[:, 2].reshape(s1.size, s2.size)
        svg = plotting.svg_heatmap(vals, s1, s2, title=path.stem)
    elif path.suffix == ".npz":
        with np.load(path) as z:
            svg = plotting.svg_montage(z["tensor"], z["omega1"], z["s2"],
                                       z["omega3"], title="|S~(w1, s2, w3)| slices")
    else:
        raise ConfigError(f"unknown file schema: {path}")
    Path(args.out).write_text(svg)
    return EXIT_OK


def _cmd_run(args) -> int:
    t0 = time.monotonic()
    cfg = config_mod.load(args.config)
    outdir = Path(args.out or cfg.get("output", "directory", default="out"))
    outdir.mkdir(parents=True, exist_ok=True)
    plots = cfg.get("output", "plots", default=True, cast=bool)
    jobs = args.jobs or _default_jobs()
    seed = cfg.get("run", "seed", default=0, cast=int)
    np.random.seed(seed)

    try:
        report = _execute(cfg, outdir, plots, jobs)
    except WfsLabError as exc:
        stage = cfg.protocol
        print(f"error: stage {stage!r}: {exc}", file=sys.stderr)
        raise
    _json_dump(report, outdir / "report.json")

    manifest = {
        "config_sha256": _config_sha256(args.config),
        "seed": seed,
        "version": __version__,
        "wall_time_s": round(time.monotonic() - t0, 3),
        "protocol": cfg.protocol,
        "jobs": jobs,
    }
    _json_dump(manifest, outdir / "manifest.json")

    if args.certify:
        verdict = _certify(report)
        _json_dump(verdict, outdir / "certificate.json")
        if verdict["verdict"] == "weight-mixed":
            return EXIT_CERTIFY
    return EXIT_OK


def _certify(report: dict) -> dict:
    from .protocols import IsolationReport

    reports = []
    if "report" in report:
        d = report["report"]
        reports.append(IsolationReport(
            f_iso=d["f_iso"], cross_integral=d["cross_integral"],
            channel_poles=None, window=None, method=d["method"],
            cross_amplitude=d.get("cross_amplitude", 0.0)))
    if "sweep" in report:
        for d in report["sweep"].get("reports", []):
            reports.append(IsolationReport(
                f_iso=d["f_iso"], cross_integral=d["cross_integral"],
                channel_poles=None, window=None, method=d["method"],
                cross_amplitude=d.get("cross_amplitude", 0.0)))
    if not reports:
        return {"verdict": "indeterminate",
                "evidence": ["protocol produced no isolation reports"]}
    return insulation_certificate(reports)


def _cmd_protocol(args) -> int:
    cfg = config_mod.load(args.config)
    if args.name and cfg.protocol != args.name:
        raise ConfigError(
            f"config declares protocol {cfg.protocol!r} but {args.name!r} requested")
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    report = _execute(cfg, outdir, plots=True, jobs=args.jobs or _default_jobs())
    _json_dump(report, outdir / "report.json")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wfs-lab",
                                description="weight-filtered spectroscopy lab")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("model", help="dump presets or build a model")
    m.add_argument("action", choices=("dump", "build"))
    m.add_argument("--kind", default="polariton_vibron")
    m.add_argument("--config")
    m.add_argument("--out")
    m.set_defaults(fn=_cmd_model)

    r = sub.add_parser("respond", help="synthesize a response signal")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default="out")
    r.set_defaults(fn=_cmd_respond)

    i = sub.add_parser("invert", help="harmonic inversion of a response CSV")
    i.add_argument("--input", required=True)
    i.add_argument("--sidecar", required=True)
    i.add_argument("--config")
    i.add_argument("--out", default="out")
    i.set_defaults(fn=_cmd_invert)

    pr = sub.add_parser("protocol", help="run a named protocol")
    pr.add_argument("name", nargs="?", choices=("wfs", "hfs", "hwh"))
    pr.add_argument("--config", required=True)
    pr.add_argument("--out", default="out")
    pr.add_argument("--jobs", type=int)
    pr.set_defaults(fn=_cmd_protocol)

    s = sub.add_parser("sweep", help="parameter sweep")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default="out")
    s.add_argument("--jobs", type=int)
    s.set_defaults(fn=lambda a: _cmd_protocol_named(a, "sweep"))

    pl = sub.add_parser("plot", help="render a data file as SVG")
    pl.add_argument("--input", required=True)
    pl.add_argument("--out", required=True)
    pl.set_defaults(fn=_cmd_plot)

    ru = sub.add_parser("run", help="run a full configured pipeline")
    ru.add_argument("--config", required=True)
    ru.add_argument("--out")
    ru.add_argument("--jobs", type=int)
    ru.add_argument("--certify", action="store_true")
    ru.set_defaults(fn=_cmd_run)
    return p


def _cmd_protocol_named(args, name: str) -> int:
    args.name = name
    return _cmd_protocol(args)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WfsLabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
