"""Plain `key = value` experiment configuration, validation, and run manifests.

The format is deliberately third-party-free: one assignment per line, `#`
comments, dotted keys for sections.  Unknown keys are rejected; every numeric
field is validated against module preconditions before any compute starts.
"""
from __future__ import annotations

import hashlib
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigParseError, ConfigValidationError
from .params import S_MAX, S_MIN, S_MIN_INVERSION


def _parse_bool(text):
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_vec(text):
    parts = [float(p) for p in text.replace(";", ",").split(",") if p.strip()]
    if len(parts) != 3:
        raise ValueError(f"expected 3 components, got {len(parts)}")
    return tuple(parts)


def _parse_floats(text):
    return tuple(float(p) for p in text.replace(";", ",").split(",") if p.strip())


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(repr(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


# key -> (parser, default).  None default means "must not be emitted unless set".
_SCHEMA = {
    "s": (float, 0.9),
    "k": (float, 8.0),
    "k_schedule": (_parse_floats, ()),
    "branch": (str, "+"),
    "k0": (float, 1.0),
    "grid.n": (int, 32),
    "grid.L": (float, 1.0),
    "potential.kind": (str, "stock"),
    "potential.file": (str, ""),
    "potential.sigma": (float, 0.25),
    "potential.r_flat": (float, 0.55),
    "potential.r_cut": (float, 0.8),
    "potential.height": (float, 1.0),
    "incident.kind": (str, "plane"),
    "incident.amplitude": (float, 0.1),
    "incident.theta": (_parse_vec, (0.0, 0.0, 1.0)),
    "incident.order": (int, 16),
    "incident.density": (str, "uniform"),
    "incident.bump_center": (_parse_vec, (0.0, 0.0, 1.0)),
    "incident.bump_width": (float, 0.5),
    "solver.tol": (float, 1e-8),
    "solver.max_iter": (int, 50),
    "greens.method": (str, "auto"),
    "greens.eps": (float, 1e-3),
    "greens.r": (str, "1,2,4"),
    "farfield.directions": (int, 6),
    "probes.oracle": (str, "nonlinear"),
    "probes.file": (str, ""),
    "probes.a": (float, 0.05),
    "probes.l_min": (float, 16.0),
    "probes.l_scale": (float, 1.0),
    "probes.n": (int, 16),
    "output.dir": (str, ""),
    "threads": (int, 0),
}


@dataclass
class ExperimentConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        if key in self.values:
            return self.values[key]
        return _SCHEMA[key][1]

    def __eq__(self, other):
        if not isinstance(other, ExperimentConfig):
            return NotImplemented
        return self.effective() == other.effective()

    def effective(self) -> dict:
        return {key: self[key] for key in _SCHEMA}

    def emit(self) -> str:
        """Canonical text of the effective configuration (round-trips)."""
        lines = [f"{key} = {_fmt(self[key])}" for key in sorted(_SCHEMA)]
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.emit().encode()).hexdigest()

    @property
    def branch_sign(self) -> int:
        return +1 if self["branch"] == "+" else -1


def parse_config(text: str) -> ExperimentConfig:
    """Parse config text; raises ConfigParseError with a line number on the
    first malformed line and ConfigValidationError on bad values."""
    values = {}
    any_assignment = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected `key = value`, got {raw!r}", line=lineno)
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _SCHEMA:
            raise ConfigValidationError(f"line {lineno}: unknown key {key!r}")
        parser = _SCHEMA[key][0]
        try:
            values[key] = parser(val)
        except ValueError as exc:
            raise ConfigParseError(f"bad value for {key}: {exc}", line=lineno) from exc
        any_assignment = True
    if not any_assignment:
        raise ConfigParseError("config text contains no assignments", line=1)
    cfg = ExperimentConfig(values)
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig, *, inversion: bool = False) -> None:
    s = cfg["s"]
    if not (S_MIN < s < S_MAX):
        raise ConfigValidationError(
            f"s = {s} outside admissible range ({S_MIN}, {S_MAX})")
    if inversion and not (S_MIN_INVERSION < s < S_MAX):
        raise ConfigValidationError(
            f"inversion requires s in ({S_MIN_INVERSION}, {S_MAX}), got {s}")
    if cfg["k"] <= 0:
        raise ConfigValidationError("k must be positive")
    if cfg["k0"] <= 0:
        raise ConfigValidationError("k0 must be positive")
    if cfg["branch"] not in ("+", "-"):
        raise ConfigValidationError("branch must be '+' or '-'")
    if cfg["grid.n"] < 8:
        raise ConfigValidationError("grid.n must be >= 8")
    if cfg["grid.L"] <= 0:
        raise ConfigValidationError("grid.L must be positive")
    if cfg["solver.tol"] <= 0 or cfg["solver.max_iter"] < 1:
        raise ConfigValidationError("solver.tol must be > 0 and max_iter >= 1")
    if cfg["incident.amplitude"] < 0:
        raise ConfigValidationError("incident amplitude must be nonnegative")
    if cfg["greens.method"] not in ("auto", "pv", "subord", "eps"):
        raise ConfigValidationError("greens.method must be auto|pv|subord|eps")
    if cfg["probes.oracle"] not in ("synthetic-born", "nonlinear", "from-file"):
        raise ConfigValidationError(
            "probes.oracle must be synthetic-born|nonlinear|from-file")
    theta = np.asarray(cfg["incident.theta"])
    if abs(np.linalg.norm(theta) - 1.0) > 1e-9:
        raise ConfigValidationError("incident.theta must be a unit vector")


# ---------------------------------------------------------------------------
# run manifest
# ---------------------------------------------------------------------------

def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    config_digest: str
    code_version: str
    started: float = field(default_factory=time.time)
    stages: list = field(default_factory=list)
    outputs: list = field(default_factory=list)

    def stage(self, name: str, status: str = "ok") -> None:
        self.stages.append((name, status))

    def add_output(self, path) -> None:
        self.outputs.append(str(path))

    def write(self, path) -> None:
        """Write atomically (tmp + rename)."""
        finished = time.time()
        lines = [
            f"config_digest = {self.config_digest}",
            f"code_version = {self.code_version}",
            f"started = {self.started:.3f}",
            f"finished = {finished:.3f}",
        ]
        for name, status in self.stages:
            lines.append(f"stage.{name} = {status}")
        for out in self.outputs:
            lines.append(f"output = {out}")
            if os.path.exists(out):
                lines.append(f"output_sha256.{os.path.basename(out)} = {_sha256_file(out)}")
        tmp = str(path) + ".tmp"
        with open(tmp, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, str(path))
