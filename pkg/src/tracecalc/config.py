"""Line-oriented experiment configs: ``section.key = value``, ``#`` comments.

Example::

    experiment.name = krein-check
    potential.spec  = sech2 depth=3 width=1
    lattice.L       = 200
    run.seed        = 0
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ConfigError, TracecalcError
from .functions import parse_function
from .potentials import parse_potential

__all__ = ["Param", "ExperimentConfig", "Diagnostic", "parse_config_text", "read_config", "coerce"]

SECTIONS = ("experiment", "function", "potential", "lattice", "quadrature", "sweep", "output", "run")
COMMON = ("experiment.name", "output.dir", "output.prefix", "run.seed", "run.threads")
_LINE = re.compile(r"^([A-Za-z_]+)\.([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$")


@dataclass(frozen=True)
class Param:
    """A typed experiment parameter; ``kind`` is one of int, float, floats, str,
    function, potential or ``choice:a|b|c``."""

    kind: str
    default: object
    help: str = ""


@dataclass
class Diagnostic:
    line: int
    message: str

    def __str__(self):
        return f"line {self.line}: {self.message}" if self.line else self.message


@dataclass
class ExperimentConfig:
    name: str
    values: dict = field(default_factory=dict)  # "section.key" -> raw string
    lines: dict = field(default_factory=dict)  # "section.key" -> line number
    seed: int = 0
    threads: int = 1
    out_dir: str = "results"
    prefix: str = ""
    source: str = "<defaults>"


def coerce(kind, raw):
    """Convert a raw config string to the parameter's type."""
    raw = raw.strip()
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "floats":
        parts = [p for p in re.split(r"[,\s]+", raw) if p]
        if not parts:
            raise ValueError("empty list")
        return tuple(float(p) for p in parts)
    if kind == "str":
        return raw
    if kind == "function":
        return parse_function(raw)
    if kind == "potential":
        return parse_potential(raw)
    if kind.startswith("choice:"):
        opts = kind.split(":", 1)[1].split("|")
        if raw not in opts:
            raise ValueError(f"expected one of {', '.join(opts)}")
        return raw
    raise ValueError(f"unknown parameter kind {kind!r}")


def parse_config_text(text, source="<string>"):
    """Parse without validating against an experiment. Returns (values, lines, diagnostics)."""
    values, lines, diags = {}, {}, []
    for no, line in enumerate(text.splitlines(), start=1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        m = _LINE.match(s)
        if not m:
            diags.append(Diagnostic(no, f"expected 'section.key = value', got {s!r}"))
            continue
        sec, key, val = m.groups()
        full = f"{sec}.{key}"
        if sec not in SECTIONS:
            diags.append(Diagnostic(no, f"unknown section {sec!r} in key {full!r}; valid sections: {', '.join(SECTIONS)}"))
            continue
        if full in values:
            diags.append(Diagnostic(no, f"duplicate key {full!r} (first set on line {lines[full]})"))
            continue
        if val == "":
            diags.append(Diagnostic(no, f"key {full!r} has an empty value"))
            continue
        values[full] = val
        lines[full] = no
    if not values and not diags:
        diags.append(Diagnostic(0, f"{source}: config is empty"))
    return values, lines, diags


def validate_values(values, lines, registry):
    """Check experiment name, key names and value types; returns diagnostics."""
    diags = []
    name = values.get("experiment.name")
    if name is None:
        return [Diagnostic(0, "missing required key 'experiment.name'")]
    if name not in registry:
        return [Diagnostic(lines.get("experiment.name", 0),
                           f"unknown experiment {name!r}; valid: {', '.join(sorted(registry))}")]
    params = registry[name].params
    for key, raw in values.items():
        no = lines.get(key, 0)
        if key in COMMON:
            kind = {"run.seed": "int", "run.threads": "int"}.get(key, "str")
        elif key in params:
            kind = params[key].kind
        else:
            valid = ", ".join(sorted(params)) or "(none)"
            diags.append(Diagnostic(no, f"unknown key {key!r} for experiment {name!r}; valid keys: {valid}"))
            continue
        try:
            coerce(kind, raw)
        except (ValueError, TracecalcError) as exc:
            diags.append(Diagnostic(no, f"bad value for {key!r}: {exc}"))
    for key in ("run.seed", "run.threads"):
        if key in values and not diags:
            if int(values[key]) < (0 if key == "run.seed" else 1):
                diags.append(Diagnostic(lines[key], f"{key} out of range"))
    return diags


def read_config(path, registry):
    """Parse and validate a config file; raises ConfigError on the first problem."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    values, lines, diags = parse_config_text(text, source=str(path))
    if not diags:
        diags = validate_values(values, lines, registry)
    if diags:
        d = diags[0]
        raise ConfigError(d.message, line=d.line or None)
    return make_config(values, lines, source=str(path))


def make_config(values, lines=None, source="<defaults>"):
    return ExperimentConfig(
        name=values["experiment.name"],
        values=dict(values),
        lines=dict(lines or {}),
        seed=int(values.get("run.seed", 0)),
        threads=int(values.get("run.threads", 1)),
        out_dir=values.get("output.dir", "results"),
        prefix=values.get("output.prefix", ""),
        source=source,
    )
