"""Synthetic datasets for the three experiments, with their ground truth."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from .fhmm import FhmmModel
from .regression import RegressionModel
from .tumor import TumorModel, allele_frequency

EXPERIMENTS = ("tumor", "regression", "fhmm")

# Two clone architectures with identical allele frequencies (0.5, 0.3, 0.15).
# Rows are clones, columns are mutations.
LINEAR_ARCHITECTURE = (np.array([[1, 1, 1], [1, 1, 0], [1, 0, 0]], dtype=np.int8),
                       np.array([0.3, 0.3, 0.4]))
BRANCHED_ARCHITECTURE = (np.array([[1, 0, 0], [1, 1, 0], [1, 0, 1]], dtype=np.int8),
                         np.array([0.1, 0.6, 0.3]))
ARCHITECTURES = {"linear": LINEAR_ARCHITECTURE, "branched": BRANCHED_ARCHITECTURE}

DEFAULTS = {
    "tumor": {"architecture": "linear", "depth": 1000, "error_rate": 0.001, "replicates": 1},
    "regression": {"n": 100, "d": 1200, "confounders": None, "coefficient": 1.0, "snr": 5.0},
    "fhmm": {"n": 1000, "k": 10, "dim": 1, "sigma2": 0.01, "rho": 0.05, "nu": 0.5,
             "w_scale": 1.0},
}


@dataclass
class Dataset:
    """Simulated (or loaded) data, ground truth and generation settings."""

    experiment: str
    data: dict
    truth: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def build_model(self, **options):
        """Model target for this dataset; ``options`` go to the model constructor."""
        d = self.data
        if self.experiment == "tumor":
            return TumorModel(d["reads"], d["depth"], **options)
        if self.experiment == "regression":
            return RegressionModel(d["y"], d["Z"], **options)
        if self.experiment == "fhmm":
            kw = {"rho": d["rho"], "nu": d["nu"], "w0": d["w0"]}
            kw.update(options)
            return FhmmModel(d["y"], d["w"], **kw)
        raise ConfigError(f"unknown experiment {self.experiment!r}", key="model.name")


def default_confounders(d: int) -> tuple:
    """1-based indices of the duplicated covariates: (11, 611), moved inside small designs."""
    if d >= 611:
        return (11, 611)
    if d >= 22:
        return (11, 11 + d // 2)
    return (1, 1 + d // 2)


def _params(name, params):
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; expected one of {EXPERIMENTS}",
                          key="model.name")
    merged = dict(DEFAULTS[name])
    for key, value in (params or {}).items():
        if key not in merged:
            raise ConfigError(f"unknown parameter for {name}", key=f"model.{key}")
        merged[key] = value
    return merged


def simulate_experiment(name: str, params: dict | None = None, rng=None) -> Dataset:
    """Generate a dataset for ``tumor``, ``regression`` or ``fhmm``.

    ``params`` overrides the entries of :data:`DEFAULTS`; unknown keys raise
    :class:`ConfigError`.
    """
    p = _params(name, params)
    rng = np.random.default_rng() if rng is None else rng
    if name == "tumor":
        return _simulate_tumor(p, rng)
    if name == "regression":
        return _simulate_regression(p, rng)
    return _simulate_fhmm(p, rng)


def _simulate_tumor(p, rng) -> Dataset:
    if p["architecture"] not in ARCHITECTURES:
        raise ConfigError(f"unknown architecture {p['architecture']!r}", key="model.architecture")
    x, theta = ARCHITECTURES[p["architecture"]]
    reps = int(p["replicates"])
    x = np.tile(x, (1, reps))
    e = float(p["error_rate"])
    phi = allele_frequency(x, theta, e)
    depth = np.full(phi.size, int(p["depth"]), dtype=np.int64)
    reads = rng.binomial(depth, phi)
    truth = {"x": x, "theta": theta, "phi": phi,
             "modes": {k: np.tile(v[0], (1, reps)) for k, v in ARCHITECTURES.items()}}
    return Dataset("tumor", {"reads": reads, "depth": depth}, truth,
                   {"error_rate": e, "architecture": p["architecture"], "replicates": reps})


def _simulate_regression(p, rng) -> Dataset:
    n, d = int(p["n"]), int(p["d"])
    conf = p["confounders"] or default_confounders(d)
    c1, c2 = (int(c) - 1 for c in conf)
    if not (0 <= c1 < d and 0 <= c2 < d and c1 != c2):
        raise ConfigError("confounders must be two distinct indices in 1..d", key="model.confounders")
    Z = rng.standard_normal((n, d))
    Z[:, c2] = Z[:, c1]
    signal = float(p["coefficient"]) * Z[:, c1]
    noise_sd = np.sqrt(float(p["coefficient"]) ** 2 / float(p["snr"]))
    y = signal + noise_sd * rng.standard_normal(n)
    active = np.zeros(d, dtype=np.int8)
    active[c1] = 1
    truth = {"active": active, "confounders": (c1 + 1, c2 + 1)}
    return Dataset("regression", {"y": y, "Z": Z}, truth,
                   {"confounders": f"{c1 + 1};{c2 + 1}", "snr": float(p["snr"]),
                    "coefficient": float(p["coefficient"])})


def _simulate_fhmm(p, rng) -> Dataset:
    n, k, dim = int(p["n"]), int(p["k"]), int(p["dim"])
    rho = np.full(k, float(p["rho"]))
    nu = np.full(k, float(p["nu"]))
    w = float(p["w_scale"]) * rng.standard_normal((k, dim))
    w0 = np.zeros(dim)
    x = np.empty((k, n), dtype=np.int8)
    x[:, 0] = rng.random(k) < nu
    flips = rng.random((k, n - 1)) < rho[:, None]
    for i in range(1, n):
        x[:, i] = x[:, i - 1] ^ flips[:, i - 1]
    sigma2 = float(p["sigma2"])
    y = w0 + x.T @ w + np.sqrt(sigma2) * rng.standard_normal((n, dim))
    data = {"y": y, "w": w, "w0": w0, "rho": rho, "nu": nu}
    return Dataset("fhmm", data, {"x": x, "sigma2": sigma2}, {"sigma2": sigma2})
