"""Run configuration: ``section.key = value`` text files.

Values are Python literals (numbers, bracketed row-major matrices, quoted
strings) or bare words for enum options.  ``#`` starts a comment; a value
with unbalanced brackets continues on the following lines.

Model keys::

    model.n_particles, model.mass, model.hbar, model.lambda,
    model.intra_coupling, model.inter_coupling, model.anharmonic_coeffs

or, instead of the two matrices, a standard chain::

    model.kind (open-chain|ring), model.w, model.kappa, model.k_shape (uniform|diagonal)

Run keys::

    grid.omega_min, grid.omega_max, grid.omega_count, grid.t_max, grid.dt
    run.epsilon, run.alpha_method (exact|paper), run.regime (full|semiclassical),
    run.output_dir, run.format (csv|json), run.jobs
    dynamics.x0
    oracle.n_max, oracle.n_states
"""

import ast
import hashlib
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, InvalidParameterError
from .model import ChainModel, build_standard_model

KEYS = {
    "model.n_particles": int,
    "model.mass": float,
    "model.hbar": float,
    "model.lambda": float,
    "model.intra_coupling": "matrix",
    "model.inter_coupling": "matrix",
    "model.anharmonic_coeffs": "vector",
    "model.kind": ("open-chain", "ring"),
    "model.w": float,
    "model.kappa": float,
    "model.k_shape": ("uniform", "diagonal"),
    "grid.omega_min": float,
    "grid.omega_max": float,
    "grid.omega_count": int,
    "grid.t_max": float,
    "grid.dt": float,
    "run.epsilon": float,
    "run.alpha_method": ("exact", "paper"),
    "run.regime": ("full", "semiclassical"),
    "run.output_dir": str,
    "run.format": ("csv", "json"),
    "run.jobs": int,
    "dynamics.x0": float,
    "oracle.n_max": int,
    "oracle.n_states": int,
}

# keys that steer where/how work runs but never change output bytes
NON_SEMANTIC = {"run.output_dir", "run.jobs"}


@dataclass(frozen=True)
class RunConfig:
    model: ChainModel
    omega_min: float = 0.01
    omega_max: float = None
    omega_count: int = 4000
    t_max: float = None
    dt: float = None
    epsilon: float = None
    alpha_method: str = "exact"
    regime: str = "full"
    output_dir: str = "collspec-out"
    format: str = "csv"
    jobs: int = 1
    x0: float = 1.0
    n_max: int = None
    n_states: int = 12

    def __post_init__(self):
        if not self.omega_min > 0:
            raise InvalidParameterError("grid.omega_min must be positive")
        if self.omega_max is not None and not self.omega_max > self.omega_min:
            raise InvalidParameterError("grid.omega_max must exceed grid.omega_min")
        if self.omega_count < 2:
            raise InvalidParameterError("grid.omega_count must be >= 2")
        for name in ("t_max", "dt", "epsilon"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise InvalidParameterError(f"{name} must be positive")
        if self.jobs < 1:
            raise InvalidParameterError("run.jobs must be >= 1")

    def omega_grid(self, omega_max):
        return np.linspace(self.omega_min, omega_max, self.omega_count)

    def resolved(self, **values):
        return replace(self, **values)

    def to_items(self):
        """Canonical ``(key, value)`` pairs, explicit matrices only."""
        m = self.model
        items = [
            ("model.n_particles", m.n_particles),
            ("model.mass", m.mass),
            ("model.hbar", m.hbar),
            ("model.lambda", m.lam),
            ("model.intra_coupling", m.intra_coupling.tolist()),
            ("model.inter_coupling", m.inter_coupling.tolist()),
            ("model.anharmonic_coeffs", list(m.anharmonic_coeffs)),
            ("grid.omega_min", self.omega_min),
            ("grid.omega_max", self.omega_max),
            ("grid.omega_count", self.omega_count),
            ("grid.t_max", self.t_max),
            ("grid.dt", self.dt),
            ("run.epsilon", self.epsilon),
            ("run.alpha_method", self.alpha_method),
            ("run.regime", self.regime),
            ("run.output_dir", self.output_dir),
            ("run.format", self.format),
            ("run.jobs", self.jobs),
            ("dynamics.x0", self.x0),
            ("oracle.n_max", self.n_max),
            ("oracle.n_states", self.n_states),
        ]
        return [(k, v) for k, v in items if v is not None]

    def canonical_text(self, semantic_only=False):
        lines = []
        for key, value in self.to_items():
            if semantic_only and key in NON_SEMANTIC:
                continue
            lines.append(f"{key} = {format_value(value)}")
        return "\n".join(lines) + "\n"

    def config_hash(self):
        return hashlib.sha256(self.canonical_text(semantic_only=True).encode()).hexdigest()

    def model_hash(self):
        return hashlib.sha256(model_to_text(self.model).encode()).hexdigest()


def format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(format_value(v) for v in value) + "]"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def model_to_text(model):
    """Canonical text of just the model keys."""
    items = RunConfig(model).to_items()
    return "".join(f"{k} = {format_value(v)}\n" for k, v in items if k.startswith("model."))


def model_from_text(text):
    return build_config(parse_config_text(text)).model


def _logical_lines(text):
    buf, start, depth = "", None, 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip() and depth == 0:
            continue
        if depth == 0:
            buf, start = line, lineno
        else:
            buf += " " + line.strip()
        depth = buf.count("[") - buf.count("]")
        if depth < 0:
            raise ConfigError(f"line {start}: unbalanced ']'", line=start)
        if depth == 0:
            yield start, buf
    if depth > 0:
        raise ConfigError(f"line {start}: unterminated '['", line=start)


def _coerce(key, raw, lineno):
    kind = KEYS[key]
    try:
        value = ast.literal_eval(raw)
    except (ValueError, SyntaxError):
        value = raw
    try:
        if isinstance(kind, tuple):
            if value not in kind:
                raise ValueError(f"expected one of {', '.join(kind)}")
            return value
        if kind == "matrix":
            arr = np.array(value, dtype=float, ndmin=2)
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise ValueError("expected a square row-major matrix")
            return arr
        if kind == "vector":
            arr = np.array(value, dtype=float, ndmin=1)
            if arr.ndim != 1:
                raise ValueError("expected a flat list")
            return tuple(arr.tolist())
        if kind is int:
            if isinstance(value, bool) or not float(value).is_integer():
                raise ValueError("expected an integer")
            return int(value)
        if kind is float:
            if isinstance(value, (bool, str)):
                raise ValueError("expected a number")
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"line {lineno}: bad value for {key}: {exc}", line=lineno, key=key) from exc


def parse_config_text(text):
    """Parse config text into ``{key: value}``; errors carry the line number."""
    values = {}
    for lineno, line in _logical_lines(text):
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'", line=lineno)
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}", line=lineno, key=key)
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}", line=lineno, key=key)
        values[key] = _coerce(key, raw, lineno)
    return values


def apply_overrides(values, overrides):
    """CLI ``--section.key value`` overrides, same coercion as the file."""
    out = dict(values)
    for key, raw in overrides.items():
        if key not in KEYS:
            raise ConfigError(f"unknown override {key!r}", key=key)
        out[key] = _coerce(key, raw, None)
    return out


def build_config(values):
    g = values.get
    if "model.intra_coupling" in values or "model.inter_coupling" in values:
        for key in ("model.intra_coupling", "model.inter_coupling"):
            if key not in values:
                raise ConfigError(f"missing {key}", key=key)
        w = values["model.intra_coupling"]
        model = ChainModel(
            n_particles=g("model.n_particles", w.shape[0]),
            mass=g("model.mass", 1.0),
            hbar=g("model.hbar", 1.0),
            lam=g("model.lambda", 0.0),
            intra_coupling=w,
            inter_coupling=values["model.inter_coupling"],
            anharmonic_coeffs=g("model.anharmonic_coeffs", (1.0,)),
        )
    else:
        if "model.n_particles" not in values:
            raise ConfigError("missing model.n_particles", key="model.n_particles")
        model = build_standard_model(
            kind=g("model.kind", "open-chain"),
            n=values["model.n_particles"],
            w=g("model.w", 1.0),
            kappa=g("model.kappa", 1.0),
            k_shape=g("model.k_shape", "uniform"),
            mass=g("model.mass", 1.0),
            hbar=g("model.hbar", 1.0),
            lam=g("model.lambda", 0.0),
            coeffs=g("model.anharmonic_coeffs", (1.0,)),
        )
    return RunConfig(
        model=model,
        omega_min=g("grid.omega_min", 0.01),
        omega_max=g("grid.omega_max"),
        omega_count=g("grid.omega_count", 4000),
        t_max=g("grid.t_max"),
        dt=g("grid.dt"),
        epsilon=g("run.epsilon"),
        alpha_method=g("run.alpha_method", "exact"),
        regime=g("run.regime", "full"),
        output_dir=g("run.output_dir", "collspec-out"),
        format=g("run.format", "csv"),
        jobs=g("run.jobs", 1),
        x0=g("dynamics.x0", 1.0),
        n_max=g("oracle.n_max"),
        n_states=g("oracle.n_states", 12),
    )


def load_config(path, overrides=None, default_output_dir=None):
    with open(path) as fh:
        values = parse_config_text(fh.read())
    if default_output_dir is not None:
        values.setdefault("run.output_dir", default_output_dir)
    return build_config(apply_overrides(values, overrides or {}))
