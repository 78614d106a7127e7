"""Command line front end: ``hamball simulate|run|oracle|grid|diag``.

Exit codes: 0 on success, 2 for configuration (and input) errors, 3 for
numerical failures during a run.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import diagnostics, oracle
from .engine import SamplerStepError, run_chain
from .engine.run import stream_seed
from .errors import ConfigError, ContractError, NumericalDegeneracyError
from .models import EXPERIMENTS, flat_model, read_dataset, simulate_experiment, write_dataset
from .runconfig import RunConfig, initial_state, load_config

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

# simulate flags -> simulator parameter names
SIM_FLAGS = {
    "n": int, "d": int, "k": int, "dim": int, "sigma2": float, "rho": float, "nu": float,
    "w_scale": float, "depth": int, "error_rate": float, "architecture": str,
    "replicates": int, "snr": float, "coefficient": float, "confounders": str,
}


def _add_common(p):
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--iters", type=int, help="iterations")
    p.add_argument("--burnin", type=int, help="burn-in iterations")
    p.add_argument("--thin", type=int, help="thinning interval")
    p.add_argument("--scheme", help="hb | hb-block | block-gibbs | pure-mh")
    p.add_argument("--m", help="radius, or comma-separated radius per block")
    p.add_argument("--K", type=int, help="block size of vector states")
    p.add_argument("--lambda", dest="lam", type=float, help="auxiliary weighting")
    p.add_argument("--data", help="dataset directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hamball", description="Hamming-ball samplers for discrete latent variable models.")
    sub = parser.add_subparsers(dest="command", required=True)
    sim = sub.add_parser("simulate", help="write a synthetic dataset")
    sim.add_argument("experiment", choices=EXPERIMENTS)
    _add_common(sim)
    for flag, kind in SIM_FLAGS.items():
        sim.add_argument(f"--{flag.replace('_', '-')}", dest=f"sim_{flag}", type=kind)
    for name, help_text in (("run", "run a chain"), ("oracle", "exact tables on a tiny model"),
                            ("grid", "(m, K) efficiency grid")):
        _add_common(sub.add_parser(name, help=help_text))
    diag = sub.add_parser("diag", help="IAT / ESS of a trace file")
    diag.add_argument("trace", help="trace CSV written by 'run'")
    diag.add_argument("--out", help="output directory")
    return parser


def _overrides(args, cfg: RunConfig) -> RunConfig:
    pairs = {"sampler.seed": args.seed, "io.out": args.out, "sampler.iterations": args.iters,
             "sampler.burnin": args.burnin, "sampler.thin": args.thin,
             "sampler.scheme": args.scheme, "sampler.m": args.m, "sampler.K": args.K,
             "sampler.lambda": args.lam, "io.data": args.data}
    for key, value in pairs.items():
        if value is not None:
            cfg.set(key, value)
    return cfg


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    return _overrides(args, cfg)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.get("io.out", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _model(cfg: RunConfig):
    name = cfg.model_name
    if name is None and cfg.get("io.data") is None:
        raise ConfigError("set model.name or io.data", key="model.name")
    if name == "flat":
        shape = cfg.get("model.shape")
        if shape is None:
            raise ConfigError("the flat model needs a shape", key="model.shape")
        return flat_model(shape, cfg.get("model.n_symbols", 2)), None
    if cfg.get("io.data") is None:
        raise ConfigError(f"model {name} needs a dataset directory", key="io.data")
    dataset = read_dataset(cfg.get("io.data"))
    if name is not None and dataset.experiment != name:
        raise ConfigError(f"dataset holds {dataset.experiment!r}, config says {name!r}",
                          key="model.name")
    try:
        return dataset.build_model(**cfg.model_options()), dataset
    except ContractError as exc:
        raise ConfigError(str(exc), key="model") from None


def _write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _number(v):
    if isinstance(v, float):
        return str(int(v)) if v.is_integer() else repr(v)
    return str(v)


def _series_stats(name, series):
    if len(series) < diagnostics.MIN_SERIES:
        return []
    tau = diagnostics.iat(series)
    return [(f"iat_{name}", _number(tau)), (f"ess_{name}", _number(diagnostics.ess(series)))]


# -- subcommands -------------------------------------------------------------

def cmd_simulate(args) -> int:
    params = {}
    for flag, kind in SIM_FLAGS.items():
        v = getattr(args, f"sim_{flag}")
        if v is None:
            continue
        if flag == "confounders":
            v = tuple(int(p) for p in v.replace(";", ",").split(","))
        params[flag] = v
    seed = 0 if args.seed is None else args.seed
    rng = np.random.default_rng(stream_seed(seed, 0))
    dataset = simulate_experiment(args.experiment, params, rng)
    dataset.meta["seed"] = seed
    out = Path(args.out or f"data/{args.experiment}")
    for path in write_dataset(dataset, out):
        print(path)
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _config(args)
    model, dataset = _model(cfg)
    config = cfg.sampler_config()
    x0 = initial_state(cfg, model, dataset)
    trace = run_chain(config, model, x0=x0)
    out = _out_dir(cfg)
    trace_path = out / cfg.get("io.trace", "trace.csv")
    trace.to_csv(trace_path, timing=cfg.get("io.timing", True))
    rates = trace.counters.rates()
    rows = [("scheme", config.scheme), ("iterations", config.iterations),
            ("records", len(trace)),
            ("total_candidate_evaluations", trace.counters.candidate_evaluations),
            ("candidate_evaluations_per_sweep", _number(trace.evaluations_per_sweep)),
            ("theta_acceptance", _number(rates["theta_acceptance"])),
            ("state_acceptance", _number(rates["state_acceptance"])),
            ("max_move", trace.max_move), ("move_bound_violations", 0)]
    rows += _series_stats("log_joint", trace.log_joint)
    for j, name in enumerate(trace.theta_names):
        if len(trace) >= diagnostics.MIN_SERIES:
            rows += _series_stats(name, trace.theta[:, j])
    summary_path = out / cfg.get("io.summary", "summary.csv")
    _write_rows(summary_path, ["key", "value"], rows)
    (out / "config.txt").write_text(cfg.to_text(), encoding="utf-8")
    print(trace_path)
    print(summary_path)
    return EXIT_OK


def _trace_states(path, shape):
    """Recover binary vector states from the ``state`` column of a trace file."""
    states = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            x = np.zeros(shape, dtype=np.int8)
            s = row["state"]
            if len(shape) == 1:
                for tok in filter(None, s.split(";")):
                    pos, _, sym = tok.partition(":")
                    x[int(pos) - 1] = int(sym) if sym else 1
            else:
                x = np.array([int(c) for c in s], dtype=np.int8).reshape(shape)
            states.append(x)
    return np.array(states)


def cmd_oracle(args) -> int:
    cfg = _config(args)
    model, _ = _model(cfg)
    bound = cfg.get("oracle.bound", oracle.POSTERIOR_BOUND)
    table = oracle.exact_posterior(model, model.initial_theta(), bound=bound)
    out = _out_dir(cfg)
    table.to_csv(out / "exact_table.csv")
    marg = oracle.exact_marginals(table)
    flat = marg.reshape(-1, model.n_symbols)
    _write_rows(out / "exact_marginals.csv", ["position", "symbol", "probability"],
                [(i + 1, s, repr(float(flat[i, s])))
                 for i in range(flat.shape[0]) for s in range(model.n_symbols)])
    print(f"log normalizer {table.log_normalizer!r}")
    if model.n_symbols == 2:
        print("marginals " + " ".join(f"{p:.6g}" for p in flat[:, 1]))
    trace_path = cfg.get("oracle.trace")
    if trace_path:
        states = _trace_states(trace_path, tuple(model.shape)).reshape(-1, flat.shape[0])
        est = np.stack([(states == s).mean(axis=0) for s in range(model.n_symbols)], axis=1)
        dev = float(np.abs(est - flat).max())
        _write_rows(out / "oracle_report.csv", ["key", "value"],
                    [("records", states.shape[0]), ("max_abs_deviation", repr(dev))])
        print(f"max abs deviation {dev:.6g}")
    return EXIT_OK


def _grid_modes(cfg, model, dataset):
    modes = cfg.get("grid.modes")
    D = int(np.prod(model.shape))
    if modes is None:
        conf = dataset.truth.get("confounders") if dataset is not None else None
        if not conf:
            raise ConfigError("give the reference modes, e.g. '3|10'", key="grid.modes")
        modes = tuple((c,) for c in conf)
    out = []
    for active in modes:
        x = np.zeros(D, dtype=np.int8)
        x[[a - 1 for a in active]] = 1
        out.append(x.reshape(model.shape))
    return out


def cmd_grid(args) -> int:
    cfg = _config(args)
    model, dataset = _model(cfg)
    modes = _grid_modes(cfg, model, dataset)
    grid = diagnostics.efficiency_grid(
        model, diagnostics.NearestModeClassifier(modes), budget=cfg.get("grid.budget", 200_000),
        seed=cfg.get("sampler.seed", 0), x0=modes[0],
        min_iterations=cfg.get("grid.min_iterations", 200),
        max_iterations=cfg.get("grid.max_iterations"), radii=cfg.get("grid.radii"),
        block_sizes=cfg.get("grid.block_sizes"))
    path = _out_dir(cfg) / "grid.csv"
    grid.to_csv(path)
    best = grid.best()
    print(path)
    print(f"best cell m={best.m} K={best.K} overall={best.overall:.6g}")
    return EXIT_OK


def cmd_diag(args) -> int:
    path = Path(args.trace)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read trace: {exc.strerror}", key="trace") from None
    if not rows:
        raise ConfigError("trace has no records", key="trace")
    names = [k for k in rows[0] if k not in ("iter", "elapsed_ms", "state")]
    out_rows = [("records", len(rows))]
    for name in names:
        series = np.array([float(r[name]) for r in rows])
        out_rows += _series_stats(name, series)
    out = Path(args.out or path.parent)
    out.mkdir(parents=True, exist_ok=True)
    target = out / "diagnostics.csv"
    _write_rows(target, ["key", "value"], out_rows)
    for key, value in out_rows:
        print(f"{key} {value}")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "run": cmd_run, "oracle": cmd_oracle,
            "grid": cmd_grid, "diag": cmd_diag}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ContractError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SamplerStepError, NumericalDegeneracyError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
