"""Run configuration: flat INI-style files with units spelled out in key
names (e.g. ``g_mev``, ``tau1_step_ps``), chosen for diffability.

A RunConfig is a thin typed view over the parsed sections; ``load`` and
``dump`` round-trip exactly (sections and keys are emitted sorted).
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field

from .errors import ConfigError
from .models import MODEL_KINDS, PRESETS, ModelSpec

PROTOCOLS = ("linear", "wfs", "hfs", "hwh", "sweep")

#: keys accepted in [grids]; each axis takes start/stop/step in ps
GRID_AXES = ("tau1", "tau2", "t1", "t2", "t3", "t")


@dataclass
class RunConfig:
    sections: dict[str, dict[str, str]] = field(default_factory=dict)

    # ---- typed accessors -------------------------------------------------
    def get(self, section: str, key: str, default=None, cast=str):
        try:
            raw = self.sections[section][key]
        except KeyError:
            if default is not None or (section in self.sections and default is None):
                return default
            if section not in self.sections:
                raise ConfigError(f"missing section [{section}]") from None
            return default
        try:
            if cast is bool:
                return raw.strip().lower() in ("1", "true", "yes", "on")
            return cast(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from None

    def require(self, section: str, key: str, cast=str):
        if section not in self.sections:
            raise ConfigError(f"missing section [{section}]")
        if key not in self.sections[section]:
            raise ConfigError(f"missing key {key!r} in section [{section}]")
        return self.get(section, key, cast=cast)

    # ---- derived objects -------------------------------------------------
    @property
    def protocol(self) -> str:
        name = self.require("protocol", "name")
        if name not in PROTOCOLS:
            raise ConfigError(
                f"[protocol] name = {name!r}; expected one of {PROTOCOLS}"
            )
        return name

    def model_spec(self) -> ModelSpec:
        sec = self.sections.get("model")
        if not sec:
            raise ConfigError("missing section [model]")
        kind = sec.get("kind")
        if kind is None:
            raise ConfigError("missing key 'kind' in section [model]")
        if kind not in MODEL_KINDS or kind == "custom":
            raise ConfigError(
                f"[model] kind = {kind!r}; expected one of "
                f"{[k for k in MODEL_KINDS if k != 'custom']}"
            )
        params = dict(PRESETS[kind])
        seed = None
        for key, raw in sec.items():
            if key == "kind":
                continue
            if key == "disorder_seed":
                seed = int(raw)
                continue
            if key == "probe_mode":
                params[key] = raw
                continue
            if key not in params:
                raise ConfigError(
                    f"[model] unknown parameter {key!r} for kind {kind!r} "
                    f"(known: {sorted(params)})"
                )
            try:
                params[key] = type(params[key])(raw) if not isinstance(
                    params[key], float
                ) else float(raw)
            except ValueError as exc:
                raise ConfigError(f"[model] {key} = {raw!r}: {exc}") from None
        return ModelSpec(kind=kind, params=params, disorder_seed=seed)

    def grid(self, axis: str):
        """Return (start, stop, step) in ps for a [grids] axis, or None."""
        sec = self.sections.get("grids", {})
        keys = (f"{axis}_start_ps", f"{axis}_stop_ps", f"{axis}_step_ps")
        if not any(k in sec for k in keys):
            return None
        vals = []
        for k in keys:
            if k not in sec:
                raise ConfigError(f"[grids] axis {axis!r} needs {k}")
            try:
                vals.append(float(sec[k]))
            except ValueError as exc:
                raise ConfigError(f"[grids] {k} = {sec[k]!r}: {exc}") from None
        start, stop, step = vals
        if step <= 0 or stop <= start:
            raise ConfigError(f"[grids] axis {axis!r}: need stop > start, step > 0")
        return start, stop, step

    def inversion_kwargs(self) -> dict:
        sec = self.sections.get("inversion", {})
        out = {}
        for key, cast in (
            ("svd_tol", float),
            ("order_cluster_tol", float),
            ("pole_merge_tol", float),
            ("max_modes", int),
        ):
            if key in sec:
                out[key] = self.get("inversion", key, cast=cast)
                if cast is float and out[key] <= 0:
                    raise ConfigError(f"[inversion] {key} must be > 0")
        return out

    def validate(self) -> None:
        self.model_spec()
        self.protocol
        self.inversion_kwargs()
        seed = self.get("run", "seed", default=0, cast=int)
        if seed < 0:
            raise ConfigError("[run] seed must be >= 0")


def load(path) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from None
    sections = {s: dict(parser.items(s)) for s in parser.sections()}
    if not sections:
        raise ConfigError(f"config {path} is empty")
    cfg = RunConfig(sections=sections)
    cfg.validate()
    return cfg


def loads(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from None
    sections = {s: dict(parser.items(s)) for s in parser.sections()}
    if not sections:
        raise ConfigError("config is empty")
    cfg = RunConfig(sections=sections)
    cfg.validate()
    return cfg


def dump(cfg: RunConfig) -> str:
    buf = io.StringIO()
    for section in sorted(cfg.sections):
        buf.write(f"[{section}]\n")
        for key in sorted(cfg.sections[section]):
            buf.write(f"{key} = {cfg.sections[section][key]}\n")
        buf.write("\n")
    return buf.getvalue()
