"""CSV reading and writing of datasets.

A dataset directory holds ``meta.csv`` (``key,value`` rows, the first being
the experiment name), ``data.csv``, ``truth.csv`` and, for the FHMM,
``params.csv`` with the known chain parameters.  Covariate, site, time and
chain numbers in files are 1-based.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from .simulate import Dataset


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def _write(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _read(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError(f"{path} is empty", key="io.data")
    return rows[0], rows[1:]


def write_dataset(ds: Dataset, out_dir) -> list:
    """Write ``ds`` into ``out_dir``; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    d, t = ds.data, ds.truth
    paths = [out / "meta.csv", out / "data.csv", out / "truth.csv"]
    _write(paths[0], ["key", "value"],
           [("experiment", ds.experiment)] + [(k, v) for k, v in ds.meta.items()])
    if ds.experiment == "tumor":
        _write(paths[1], ["site", "reads", "depth"],
               [(i + 1, r, n) for i, (r, n) in enumerate(zip(d["reads"], d["depth"]))])
        x = t["x"]
        _write(paths[2], ["clone", "theta"] + [f"mut_{i + 1}" for i in range(x.shape[1])],
               [(k + 1, t["theta"][k], *x[k]) for k in range(x.shape[0])])
    elif ds.experiment == "regression":
        Z = d["Z"]
        _write(paths[1], ["y"] + [f"z_{j + 1}" for j in range(Z.shape[1])],
               [(d["y"][i], *Z[i]) for i in range(Z.shape[0])])
        conf = set(t.get("confounders", ()))
        _write(paths[2], ["covariate", "active", "confounder"],
               [(j + 1, a, int(j + 1 in conf)) for j, a in enumerate(t["active"])])
    elif ds.experiment == "fhmm":
        y = d["y"]
        _write(paths[1], ["t"] + [f"y_{l + 1}" for l in range(y.shape[1])],
               [(i + 1, *y[i]) for i in range(y.shape[0])])
        x = t["x"]
        _write(paths[2], ["t"] + [f"x_{k + 1}" for k in range(x.shape[0])],
               [(i + 1, *x[:, i]) for i in range(x.shape[1])])
        w = d["w"]
        paths.append(out / "params.csv")
        _write(paths[3], ["chain", "rho", "nu"] + [f"w_{l + 1}" for l in range(w.shape[1])],
               [(k + 1, d["rho"][k], d["nu"][k], *w[k]) for k in range(w.shape[0])]
               + [("w0", "", "", *d["w0"])])
    else:
        raise ConfigError(f"unknown experiment {ds.experiment!r}", key="model.name")
    return paths


def _meta_value(v: str):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def read_dataset(in_dir) -> Dataset:
    """Load a dataset directory written by :func:`write_dataset`."""
    src = Path(in_dir)
    if not (src / "meta.csv").exists():
        raise ConfigError(f"no meta.csv in {src}", key="io.data")
    _, meta_rows = _read(src / "meta.csv")
    meta = {k: _meta_value(v) for k, v in meta_rows}
    name = meta.pop("experiment", None)
    header, rows = _read(src / "data.csv")
    arr = np.array(rows, dtype=float) if rows else np.zeros((0, len(header)))
    truth = {}
    has_truth = (src / "truth.csv").exists()
    if has_truth:
        t_header, t_rows = _read(src / "truth.csv")
        t_arr = np.array(t_rows, dtype=float)
    if name == "tumor":
        data = {"reads": arr[:, 1].astype(np.int64), "depth": arr[:, 2].astype(np.int64)}
        if has_truth:
            truth = {"theta": t_arr[:, 1], "x": t_arr[:, 2:].astype(np.int8)}
    elif name == "regression":
        data = {"y": arr[:, 0], "Z": arr[:, 1:]}
        if has_truth:
            truth = {"active": t_arr[:, 1].astype(np.int8),
                     "confounders": tuple(int(j) for j in t_arr[t_arr[:, 2] == 1, 0])}
    elif name == "fhmm":
        p_header, p_rows = _read(src / "params.csv")
        chains = [r for r in p_rows if r[0] != "w0"]
        offset = [r for r in p_rows if r[0] == "w0"]
        data = {"y": arr[:, 1:],
                "rho": np.array([float(r[1]) for r in chains]),
                "nu": np.array([float(r[2]) for r in chains]),
                "w": np.array([[float(v) for v in r[3:]] for r in chains]),
                "w0": (np.array([float(v) for v in offset[0][3:]]) if offset
                       else np.zeros(arr.shape[1] - 1))}
        if has_truth:
            truth = {"x": t_arr[:, 1:].T.astype(np.int8)}
            if "sigma2" in meta:
                truth["sigma2"] = float(meta["sigma2"])
    else:
        raise ConfigError(f"unknown experiment {name!r} in {src / 'meta.csv'}", key="model.name")
    return Dataset(name, data, truth, meta)
