"""Line-oriented run configuration: `dotted.key = value` with # comments.

The format is deliberately tiny — flat dotted keys, one per line — so sweep
variants diff cleanly and any language can parse an emitted config echo.
Values are booleans (true/false), numbers, bracketed lists of numbers, or
strings (bare or double-quoted).  `canonical_text` serializes with sorted
keys and repr-exact numbers; `run_id` is the first 16 hex digits of its
SHA-256, so identical resolved configurations are content-addressed.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Any, Mapping

from .core import (
    DomainSpec,
    GaussianBump,
    ModelParams,
    RunConfig,
    SourceSpec,
    build_grid,
)
from .diagnostics import WeightedMassSpec

__all__ = [
    "ConfigError",
    "parse_config_text",
    "load_config",
    "canonical_text",
    "run_id",
    "build_run_config",
    "config_echo",
    "RunSettings",
]

Value = bool | int | float | str | tuple


class ConfigError(ValueError):
    """Malformed configuration, with file line context where available."""


def _parse_scalar(token: str, lineno: int) -> Value:
    if token == "true":
        return True
    if token == "false":
        return False
    if len(token) >= 2 and token[0] == '"' and token[-1] == '"':
        return token[1:-1]
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    if token and all(ch.isalnum() or ch in "._-/" for ch in token):
        return token  # bare string
    raise ConfigError(f"line {lineno}: cannot parse value {token!r}")


def _parse_value(text: str, lineno: int) -> Value:
    text = text.strip()
    if not text:
        raise ConfigError(f"line {lineno}: empty value")
    if text.startswith("["):
        if not text.endswith("]"):
            raise ConfigError(f"line {lineno}: unterminated list {text!r}")
        inner = text[1:-1].strip()
        if not inner:
            return ()
        return tuple(_parse_scalar(tok.strip(), lineno)
                     for tok in inner.split(","))
    return _parse_scalar(text, lineno)


def parse_config_text(text: str) -> dict[str, Value]:
    """Parse `key = value` lines into a flat dict; raises ConfigError."""
    entries: dict[str, Value] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = _parse_value(value, lineno)
    return entries


def load_config(path: str) -> dict[str, Value]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return parse_config_text(text)


def _format_value(value: Value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    if isinstance(value, float):
        text = repr(value)
        return text[:-2] if text.endswith(".0") else text
    if isinstance(value, int):
        return str(value)
    return str(value)


def canonical_text(entries: Mapping[str, Value]) -> str:
    lines = [f"{key} = {_format_value(entries[key])}"
             for key in sorted(entries)]
    return "\n".join(lines) + "\n"


def run_id(entries: Mapping[str, Value]) -> str:
    digest = hashlib.sha256(canonical_text(entries).encode("utf-8"))
    return digest.hexdigest()[:16]


# -- assembling a RunConfig ----------------------------------------------------

_DEFAULTS: dict[str, Value] = {
    "domain.dim": 2,
    "domain.radius": 1.0,
    "grid.cells": 256,
    "source.a": 0.0,
    "source.b": 0.0,
    "source.c": 0.0,
    "run.dt_init": 1e-3,
    "run.dt_min": 1e-12,
    "run.dt_max": 0.5,
    "run.u_max_threshold": 1e8,
    "run.sample_interval": 0.5,
    "run.cfl_target": 0.4,
    "run.growth_cap": 0.1,
    "output.snapshot_times": (),
    "output.snapshot_resolution": 128,
}

_REQUIRED = ("params.chi", "params.h", "params.alpha", "params.tau",
             "initial.width", "run.t_end")

_KNOWN_PREFIXES = ("params.", "source.", "domain.", "grid.", "initial.",
                   "run.", "output.", "compare.", "sweep.", "diagnostics.")


@dataclass(frozen=True)
class RunSettings:
    """A resolved configuration: the RunConfig plus output/compare extras."""

    run_config: RunConfig
    entries: Mapping[str, Value]       # resolved, defaults applied
    snapshot_times: tuple
    snapshot_resolution: int
    compare_alphas: tuple
    neumann_baseline: bool

    @property
    def run_id(self) -> str:
        return run_id(self.entries)


def _number(entries: Mapping[str, Value], key: str) -> float:
    value = entries[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    return float(value)


def _intval(entries: Mapping[str, Value], key: str) -> int:
    value = entries[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return value


def build_run_config(raw: Mapping[str, Value]) -> RunSettings:
    """Validate a parsed config and assemble the solver RunConfig.

    Unknown keys are rejected (they are almost always typos in a format
    without sections), missing optional keys take defaults, and exactly one
    of initial.amplitude / initial.mass must be given.
    """
    for key in raw:
        if not key.startswith(_KNOWN_PREFIXES):
            raise ConfigError(f"unknown config key {key!r}")
    entries = dict(_DEFAULTS)
    entries.update(raw)
    missing = [key for key in _REQUIRED if key not in entries]
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing))

    has_amplitude = "initial.amplitude" in entries
    has_mass = "initial.mass" in entries
    if has_amplitude == has_mass:
        raise ConfigError(
            "exactly one of initial.amplitude / initial.mass must be set")

    try:
        params = ModelParams(
            chi=_number(entries, "params.chi"),
            h=_number(entries, "params.h"),
            alpha=_number(entries, "params.alpha"),
            tau=_intval(entries, "params.tau"),
        )
        source = SourceSpec(
            a=_number(entries, "source.a"),
            b=_number(entries, "source.b"),
            c=_number(entries, "source.c"),
        )
        grid = build_grid(
            DomainSpec(dim=_intval(entries, "domain.dim"),
                       radius=_number(entries, "domain.radius")),
            _intval(entries, "grid.cells"),
        )
        initial = GaussianBump(
            width=_number(entries, "initial.width"),
            amplitude=_number(entries, "initial.amplitude") if has_amplitude else None,
            mass=_number(entries, "initial.mass") if has_mass else None,
        )
        weighted = None
        if "diagnostics.weighted_m" in entries or "diagnostics.weighted_mu" in entries:
            weighted = WeightedMassSpec(
                m=_number(entries, "diagnostics.weighted_m"),
                mu=_number(entries, "diagnostics.weighted_mu"),
            )
        run_config = RunConfig(
            params=params,
            source=source,
            grid=grid,
            initial=initial,
            t_end=_number(entries, "run.t_end"),
            dt_init=_number(entries, "run.dt_init"),
            dt_min=_number(entries, "run.dt_min"),
            dt_max=_number(entries, "run.dt_max"),
            u_max_threshold=_number(entries, "run.u_max_threshold"),
            sample_interval=_number(entries, "run.sample_interval"),
            cfl_target=_number(entries, "run.cfl_target"),
            growth_cap=_number(entries, "run.growth_cap"),
            weighted_mass=weighted,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc

    snapshot_times = entries["output.snapshot_times"]
    if not isinstance(snapshot_times, tuple):
        raise ConfigError("output.snapshot_times must be a list")
    resolution = _intval(entries, "output.snapshot_resolution")

    alphas = entries.get("compare.alphas", ())
    if not isinstance(alphas, tuple):
        raise ConfigError("compare.alphas must be a list")
    baseline = entries.get("compare.neumann_baseline", True)
    if not isinstance(baseline, bool):
        raise ConfigError("compare.neumann_baseline must be true or false")

    return RunSettings(
        run_config=run_config,
        entries=entries,
        snapshot_times=tuple(float(t) for t in snapshot_times),
        snapshot_resolution=resolution,
        compare_alphas=tuple(float(a) for a in alphas),
        neumann_baseline=baseline,
    )


def config_echo(settings: RunSettings) -> str:
    """The resolved configuration, re-parseable by parse_config_text."""
    return canonical_text(settings.entries)
