"""Flat key=value run configuration.

Line format: ``section.key = value`` (``#`` starts a comment).  Keys are
closed-world: anything outside the registry is rejected with its line
number, as are type and constraint violations.  Every run echoes the
fully resolved configuration (defaults included) into a manifest so a
run directory is self-describing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

COMMANDS = ("solve", "norm", "verify", "counterexample")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def _float_list(text: str):
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


@dataclass(frozen=True)
class _Key:
    name: str
    kind: type          # int, float, str, or _float_list
    default: object = None
    required_for: tuple = ()
    choices: tuple | None = None
    positive: bool = False

    def parse(self, raw: str, line: int):
        try:
            if self.kind is int:
                value = int(raw)
            elif self.kind is float:
                value = float(raw)
            elif self.kind is _float_list:
                value = _float_list(raw)
            else:
                value = raw
        except ValueError:
            raise ConfigError(
                f"{self.name}: expected {self.kind.__name__}, got {raw!r}", line)
        if self.choices is not None and value not in self.choices:
            raise ConfigError(
                f"{self.name}: {value!r} not one of {self.choices}", line)
        if self.positive and not (isinstance(value, (int, float)) and value > 0):
            raise ConfigError(f"{self.name}: must be positive, got {value}", line)
        return value


_REGISTRY = {k.name: k for k in [
    _Key("command", str, choices=COMMANDS),
    # grid
    _Key("grid.nx", int, default=256, positive=True),
    _Key("grid.ny", int, default=None),
    _Key("grid.lx", float, default=64.0 * math.pi, positive=True),
    _Key("grid.ly", float, default=None),
    _Key("grid.dealias_fraction", float, default=2.0 / 3.0, positive=True),
    # solver
    _Key("solver.dt", float, required_for=("solve",), positive=True),
    _Key("solver.t_end", float, required_for=("solve",), positive=True),
    _Key("solver.mode", str, required_for=("solve",),
         choices=("zkb_symmetric", "zkb_original", "zk_symmetric", "parabolic")),
    _Key("solver.scheme", str, default="etdrk4", choices=("etdrk4", "ifrk4")),
    _Key("solver.snapshot_stride", int, default=100, positive=True),
    _Key("solver.nonlinear", int, default=1),
    # initial data
    _Key("data.kind", str, default="gaussian",
         choices=("zero", "gaussian", "random")),
    _Key("data.amplitude", float, default=1.0),
    _Key("data.width", float, default=8.0, positive=True),
    _Key("data.decay", float, default=2.0),
    # diagnostics
    _Key("diagnostics.sobolev_s", _float_list, default=()),
    # output / reproducibility
    _Key("output.dir", str, default=None),
    _Key("run.seed", int, default=0),
    _Key("run.threads", int, default=1, positive=True),
    # estimate lab
    _Key("lab.count", int, default=100, positive=True),
    _Key("lab.spectrum", str, default="shell_concentrated",
         choices=("shell_concentrated", "gaussian_decay", "antidiagonal_heavy")),
    _Key("lab.s", float, default=-0.4),
    _Key("lab.b", float, default=0.5),
    _Key("lab.delta", float, default=0.05),
    _Key("lab.epsilon", float, default=0.1),
    _Key("lab.nmin_exp", int, default=0),
    _Key("lab.nmax_exp", int, default=6),
    _Key("lab.atoms", int, default=24, positive=True),
    _Key("lab.env_sigma", float, default=0.15, positive=True),
    _Key("lab.p", float, default=5.0),
    _Key("lab.q", float, default=5.0),
    _Key("lab.K", float, default=512.0, positive=True),
    _Key("lab.N1", float, default=32.0, positive=True),
    _Key("lab.N2", float, default=4.0, positive=True),
    _Key("lab.L1", float, default=64.0, positive=True),
    _Key("lab.L2", float, default=64.0, positive=True),
    # counterexample
    _Key("counterexample.s", float, default=0.0),
    _Key("counterexample.nmin", int, default=4),
    _Key("counterexample.nmax", int, default=8),
    _Key("counterexample.quad", int, default=64),
    _Key("counterexample.T", float, default=1.0, positive=True),
    # norm command
    _Key("norm.input", str),
    _Key("norm.family", str, default="Xsb1",
         choices=("Hs", "Hs0_anisotropic", "Hts_antidiagonal", "Xsb1", "Xtsb1")),
    _Key("norm.s", float, default=0.0),
    _Key("norm.b", float, default=0.5),
]}


@dataclass
class RunConfig:
    """Fully resolved run description (defaults filled in)."""

    command: str
    values: dict = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.values[key]

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    @property
    def output_dir(self):
        return self.values.get("output.dir")

    @property
    def seed(self) -> int:
        return self.values["run.seed"]

    def manifest_lines(self):
        from . import __version__

        lines = [f"zkb.version = {__version__}", f"command = {self.command}"]
        for key in sorted(self.values):
            v = self.values[key]
            if isinstance(v, tuple):
                v = ",".join(f"{x:g}" for x in v)
            lines.append(f"{key} = {v}")
        return lines


def parse_config(text: str, command: str | None = None) -> RunConfig:
    """Parse key=value text into a RunConfig, or fail on the first error."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}", lineno)
        key, _, rhs = stripped.partition("=")
        key = key.strip()
        rhs = rhs.strip()
        if key not in _REGISTRY:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        values[key] = _REGISTRY[key].parse(rhs, lineno)

    cmd = values.pop("command", None) or command
    if cmd is None:
        raise ConfigError("missing command")
    if cmd not in COMMANDS:
        raise ConfigError(f"unknown command {cmd!r}")
    if command is not None and cmd != command:
        raise ConfigError(f"config command {cmd!r} does not match requested {command!r}")

    for key in _REGISTRY.values():
        if cmd in key.required_for and key.name not in values:
            raise ConfigError(f"missing required key {key.name!r} for {cmd}")
        if key.name == "command":
            continue
        values.setdefault(key.name, key.default)

    # linked defaults
    if values.get("grid.ny") is None:
        values["grid.ny"] = values["grid.nx"]
    if values.get("grid.ly") is None:
        values["grid.ly"] = values["grid.lx"]
    return RunConfig(command=cmd, values=values)
