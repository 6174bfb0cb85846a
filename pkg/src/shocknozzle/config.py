"""INI configuration for the solver and the command line tool."""

import configparser
import io
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .background import NozzleSetup
from .errors import ConfigError, ShockNozzleError
from .gas import ForceField, GasModel

# section -> (key, type) in file order
LAYOUT = {
    "gas": [("gamma", float), ("entropy_const", float)],
    "nozzle": [("L0", float), ("L1", float), ("rho0", float), ("u0", float)],
    "force": [("coeffs", "floats"), ("require_positive", bool)],
    "exit": [("pressure", "optfloat"), ("shock_position", "optfloat"), ("epsilon", float), ("profile", str),
             ("samples", "floats")],
    "grid": [("N1", int), ("N2", int)],
    "tolerances": [("tol_shoot", float), ("tol_fp", float), ("sonic_guard", float), ("max_iter", int),
                   ("eps_max", float)],
    "solver": [("n_steps", int), ("delta0", "optfloat")],
    "sweep": [("parameter", str), ("values", "floats")],
    "output": [("directory", str)],
}


@dataclass(frozen=True)
class SolverConfig:
    gamma: float = 2.0
    entropy_const: float = 1.0
    L0: float = 0.0
    L1: float = 1.0
    rho0: float = 1.0
    u0: float = 2.0
    coeffs: tuple = (0.1,)
    require_positive: bool = True
    pressure: float = None
    shock_position: float = 0.5
    epsilon: float = 0.0
    profile: str = "cos:1"
    samples: tuple = ()
    N1: int = 65
    N2: int = 65
    tol_shoot: float = 1e-10
    tol_fp: float = 1e-10
    sonic_guard: float = 1e-8
    max_iter: int = 50
    eps_max: float = 1e-2
    n_steps: int = 2000
    delta0: float = None
    parameter: str = "epsilon"
    values: tuple = field(default=())
    directory: str = "results"

    def validate(self):
        """Build every model object once so invalid inputs fail at load time."""
        def at(section, key):
            return f"[{section}] {key}"

        try:
            self.gas()
        except ShockNozzleError as exc:
            raise ConfigError(f"{at('gas', 'gamma/entropy_const')}: {exc}") from None
        try:
            self.force()
        except ShockNozzleError as exc:
            raise ConfigError(f"{at('force', 'coeffs')}: {exc}") from None
        try:
            self.setup()
        except ShockNozzleError as exc:
            raise ConfigError(f"[nozzle]: {exc}") from None
        if (self.pressure is None) == (self.shock_position is None):
            raise ConfigError("[exit]: give exactly one of pressure or shock_position")
        if self.shock_position is not None and not self.L0 < self.shock_position < self.L1:
            raise ConfigError(f"{at('exit', 'shock_position')}: must lie in (L0, L1)")
        if self.pressure is not None and not self.pressure > 0:
            raise ConfigError(f"{at('exit', 'pressure')}: must be positive")
        if self.N1 < 9 or self.N2 < 9:
            raise ConfigError(f"{at('grid', 'N1/N2')}: need at least 9 nodes per direction")
        if self.samples and len(self.samples) != self.N2:
            raise ConfigError(f"{at('exit', 'samples')}: expected {self.N2} samples, got {len(self.samples)}")
        for key in ("tol_shoot", "tol_fp", "sonic_guard", "eps_max"):
            if not getattr(self, key) > 0:
                raise ConfigError(f"{at('tolerances', key)}: must be positive")
        if self.max_iter < 1 or self.n_steps < 1:
            raise ConfigError("[tolerances] max_iter / [solver] n_steps: must be positive")
        if abs(self.epsilon) > self.eps_max:
            raise ConfigError(f"{at('exit', 'epsilon')}: |epsilon| exceeds eps_max = {self.eps_max}")
        if self.delta0 is not None and not self.delta0 >= 0:
            raise ConfigError(f"{at('solver', 'delta0')}: must be non-negative")
        if self.parameter not in ("epsilon", "shock_position", "pressure"):
            raise ConfigError(f"{at('sweep', 'parameter')}: one of epsilon, shock_position, pressure")
        return self

    def gas(self):
        return GasModel(self.gamma, self.entropy_const)

    def force(self):
        return ForceField(self.coeffs, self.L0, self.L1, require_positive=self.require_positive)

    def setup(self):
        return NozzleSetup(self.L0, self.L1, self.rho0, self.u0, self.gas(), self.force(),
                           n_steps=self.n_steps, sonic_guard=self.sonic_guard)

    def with_overrides(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _fmt(value, kind):
    if kind in ("floats",):
        return ", ".join(repr(float(v)) for v in value)
    if kind == "optfloat":
        return "none" if value is None else repr(float(value))
    if kind is float:
        return repr(float(value))
    if kind is bool:
        return "true" if value else "false"
    return str(value)


def _parse(raw, kind, where):
    try:
        if kind == "floats":
            return tuple(float(t) for t in raw.replace(",", " ").split())
        if kind == "optfloat":
            return None if raw.strip().lower() in ("none", "") else float(raw)
        if kind is bool:
            low = raw.strip().lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            val = float(raw)
            if not np.isfinite(val):
                raise ValueError(raw)
            return val
        return raw.strip()
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r}") from None


def loads(text, validate=True):
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from None
    values = {}
    for section in parser.sections():
        if section not in LAYOUT:
            raise ConfigError(f"[{section}]: unknown section")
        kinds = dict(LAYOUT[section])
        for key, raw in parser.items(section):
            if key not in kinds:
                raise ConfigError(f"[{section}] {key}: unknown key")
            values[key] = _parse(raw, kinds[key], f"[{section}] {key}")
    if values.get("pressure") is not None and "shock_position" not in values:
        values["shock_position"] = None
    cfg = SolverConfig(**values)
    return cfg.validate() if validate else cfg


def load(path, validate=True):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), validate=validate)


def dumps(cfg):
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    for section, items in LAYOUT.items():
        parser[section] = {key: _fmt(getattr(cfg, key), kind) for key, kind in items}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def dump(cfg, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(cfg))


def config_fields():
    return [f.name for f in fields(SolverConfig)]
