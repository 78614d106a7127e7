"""Flat ``key = value`` run configuration with dotted sections.

Example::

    model.name = regression
    io.data = data/regression
    sampler.scheme = hb-block
    sampler.m = 1
    sampler.K = 10
    sampler.iterations = 20000

Lines starting with ``#`` are comments.  Every key must be known; values are
parsed to their declared type and checked before any run starts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ball import RADIUS_DISTRIBUTIONS, BallSpec
from .engine.config import BLOCK_AXES, SCHEMES, THETA_UPDATES, SamplerConfig
from .errors import ConfigError, ContractError

MODEL_NAMES = ("tumor", "regression", "fhmm", "flat")
INITS = ("zeros", "truth")


def _int(v):
    return int(v)


def _float(v):
    return float(v)


def _bool(v):
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _choice(options):
    def parse(v):
        if v not in options:
            raise ValueError(f"{v!r} is not one of {', '.join(options)}")
        return v
    return parse


def _int_or_list(v):
    parts = [p for p in str(v).replace(";", ",").split(",") if p.strip()]
    values = tuple(int(p) for p in parts)
    if not values:
        raise ValueError("empty list")
    return values[0] if len(values) == 1 and "," not in str(v) else values


def _float_list(v):
    return tuple(float(p) for p in str(v).replace(";", ",").split(",") if p.strip())


def _int_list(v):
    return tuple(int(p) for p in str(v).replace(";", ",").split(",") if p.strip())


def _shape(v):
    dims = tuple(int(p) for p in str(v).lower().split("x"))
    if not 1 <= len(dims) <= 2 or min(dims) < 1:
        raise ValueError("shape must be D or KxN with positive sizes")
    return dims


def _seed(v):
    s = int(v)
    if not 0 <= s < 2 ** 64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return s


def _modes(v):
    """``3|10`` -> ((3,), (10,)); each mode is a ``;``-separated active set."""
    out = []
    for part in str(v).split("|"):
        out.append(tuple(int(p) for p in part.split(";") if p.strip()))
    if len(out) < 2:
        raise ValueError("need at least two modes separated by '|'")
    return tuple(out)


MODEL_OPTIONS = {
    "tumor": {"n_clones": _int, "error_rate": _float, "alpha": _float, "f_alpha": _float,
              "f_beta": _float, "step": _float, "joint_step": _float},
    "regression": {"g": _float, "a_sigma": _float, "b_sigma": _float, "a_pi": _float,
                   "b_pi": _float},
    "fhmm": {"a0": _float, "b0": _float, "joint_step": _float},
    "flat": {},
}

SCHEMA = {
    "model.name": _choice(MODEL_NAMES),
    "model.shape": _shape,
    "model.n_symbols": _int,
    "sampler.scheme": _choice(SCHEMES),
    "sampler.m": _int_or_list,
    "sampler.K": _int,
    "sampler.lambda": _float,
    "sampler.radius_distribution": _choice(RADIUS_DISTRIBUTIONS),
    "sampler.radius_probs": _float_list,
    "sampler.iterations": _int,
    "sampler.burnin": _int,
    "sampler.thin": _int,
    "sampler.seed": _seed,
    "sampler.theta_update": _choice(THETA_UPDATES),
    "sampler.block_axis": _choice(BLOCK_AXES),
    "sampler.product_bound": _int,
    "sampler.init": _choice(INITS),
    "io.data": str,
    "io.out": str,
    "io.trace": str,
    "io.summary": str,
    "io.timing": _bool,
    "oracle.bound": _int,
    "oracle.trace": str,
    "grid.budget": _int,
    "grid.min_iterations": _int,
    "grid.max_iterations": _int,
    "grid.modes": _modes,
    "grid.block_sizes": _int_list,
    "grid.radii": _int_list,
}


def _format(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        if v and isinstance(v[0], tuple):
            return "|".join(";".join(str(i) for i in mode) for mode in v)
        text = ",".join(repr(i) if isinstance(i, float) else str(i) for i in v)
        return text + "," if len(v) == 1 else text
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class RunConfig:
    """Validated key/value settings of one CLI job."""

    values: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.values.get(key, default)

    def set(self, key, raw) -> None:
        self.values[key] = parse_value(key, raw, self.values.get("model.name"))

    @property
    def model_name(self):
        return self.values.get("model.name")

    def model_options(self) -> dict:
        name = self.model_name
        prefix = "model."
        return {k[len(prefix):]: v for k, v in self.values.items()
                if k.startswith(prefix) and k[len(prefix):] in MODEL_OPTIONS.get(name, {})}

    def sampler_config(self) -> SamplerConfig:
        v = self.values
        m = v.get("sampler.m", 1)
        try:
            spec = BallSpec(radius=m, lam=v.get("sampler.lambda", 0.0),
                            radius_distribution=v.get("sampler.radius_distribution", "fixed"),
                            radius_probs=v.get("sampler.radius_probs"))
        except ContractError as exc:
            raise ConfigError(str(exc), key="sampler.m") from None
        except ConfigError as exc:
            raise ConfigError(str(exc).split(": ", 1)[-1],
                              key="sampler.radius_distribution") from None
        return SamplerConfig(
            scheme=v.get("sampler.scheme", "hb"), ball=spec,
            iterations=v.get("sampler.iterations", 1000), burnin=v.get("sampler.burnin"),
            thin=v.get("sampler.thin", 1), seed=v.get("sampler.seed", 0),
            theta_update=v.get("sampler.theta_update", "conditional-gibbs"),
            block_size=v.get("sampler.K"), block_axis=v.get("sampler.block_axis", "columns"),
            product_bound=v.get("sampler.product_bound", 100_000))

    def to_text(self) -> str:
        return "".join(f"{k} = {_format(self.values[k])}\n" for k in sorted(self.values))


def parse_value(key: str, raw, model_name=None):
    parser = SCHEMA.get(key)
    if parser is None and key.startswith("model."):
        parser = _model_option_parser(key, model_name)
    if parser is None:
        raise ConfigError("unknown key", key=key)
    if not isinstance(raw, str):
        raw = _format(raw)
    try:
        return parser(raw.strip())
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid value {raw!r}: {exc}", key=key) from None


def _model_option_parser(key, model_name):
    option = key[len("model."):]
    for name, opts in MODEL_OPTIONS.items():
        if (model_name is None or name == model_name) and option in opts:
            return opts[option]
    return None


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines; unknown keys and malformed lines raise ``ConfigError``."""
    raw = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value'", key=line)
        key, value = (p.strip() for p in line.split("=", 1))
        if key in raw:
            raise ConfigError(f"line {n}: duplicate key", key=key)
        raw[key] = value
    cfg = RunConfig()
    # the model name decides which model.* options are valid
    if "model.name" in raw:
        cfg.set("model.name", raw.pop("model.name"))
    for key, value in raw.items():
        cfg.set(key, value)
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", key="--config") from None
    return parse_config(text)


def initial_state(cfg: RunConfig, model, dataset=None):
    """Starting state named by ``sampler.init``."""
    if cfg.get("sampler.init", "zeros") == "zeros":
        return None
    if dataset is None or "x" not in dataset.truth and "active" not in dataset.truth:
        raise ConfigError("no ground truth available for init", key="sampler.init")
    truth = dataset.truth.get("x", dataset.truth.get("active"))
    x = np.zeros(model.shape, dtype=np.int8)
    t = np.asarray(truth)
    if t.ndim == 2:
        rows = min(t.shape[0], x.shape[0])
        x[:rows, : t.shape[1]] = t[:rows]
    else:
        x[: t.size] = t
    return x
