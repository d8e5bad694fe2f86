"""Command-line entry points: single runs, parameter sweeps, rate experiments."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import NumericalError, ReferenceFailure
from .harness import (
    RunConfig,
    default_output_dir,
    emit_outputs,
    rate_experiment,
    run_coreset_mcmc,
    run_sweep,
)

EXIT_CODES = {
    "ok": 0,
    "ValueError": 2,
    "NumericalError": 3,
    "ReferenceFailure": 4,
    "OSError": 5,
}


def load_config_file(path: str) -> dict:
    """Parse a flat ``key = value`` config file.

    Lines starting with '#' are comments; values are JSON scalars where they
    parse as such (numbers, true/false/null) and raw strings otherwise.
    """
    data = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            try:
                data[key] = json.loads(value)
            except json.JSONDecodeError:
                data[key] = value.strip("\"'")
    return data


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--model", help="model kind")
    parser.add_argument("--dataset", help="CSV dataset path (synthetic data otherwise)")
    parser.add_argument("--response-col", dest="response_col")
    parser.add_argument("--coreset-size", dest="coreset_size", type=int)
    parser.add_argument("--optimizer")
    parser.add_argument("--iters", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out")
    parser.add_argument("--metric-stride", dest="metric_stride", type=int)
    parser.add_argument("--n", type=int, help="synthetic dataset size")
    parser.add_argument("--dim", type=int, help="synthetic feature/location dimension")
    parser.add_argument("--data-seed", dest="data_seed", type=int)
    parser.add_argument("--chains", type=int)
    parser.add_argument("--subsample", type=int)
    parser.add_argument("--learning-rate", dest="learning_rate", type=float)
    parser.add_argument("--r", type=float, help="initial movement/step constant")
    parser.add_argument("--d0", type=float, help="initial distance lower bound")
    parser.add_argument("--kernel", choices=["slice", "exact", "gibbs"])
    parser.add_argument("--init-offset", dest="init_offset", type=float)
    parser.add_argument("--hot-start", dest="hot_start", choices=["on", "off", "auto"])
    parser.add_argument("--threshold", type=float, help="hot-start test threshold")
    parser.add_argument("--reference", choices=["auto", "none"])
    parser.add_argument("--reference-draws", dest="reference_draws", type=int)
    parser.add_argument("--balance", action="store_true", default=None)
    parser.add_argument("--track-kl", dest="track_kl", action="store_true", default=None)


def build_config(args) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    data = {}
    if args.config:
        data.update(load_config_file(args.config))
    skip = {"config", "command", "seeds", "methods", "grid", "window_lo", "window_hi"}
    for key, value in vars(args).items():
        if key in skip or value is None:
            continue
        if key == "hot_start":
            value = {"on": True, "off": False, "auto": None}[value]
            if value is None:
                continue
        data[key] = value
    return RunConfig.from_dict(data)


def _cmd_run(args) -> int:
    config = build_config(args)
    record = run_coreset_mcmc(config)
    csv_path, json_path = emit_outputs(record, default_output_dir(config))
    print(f"status: {record.status}")
    print(f"hot-start iteration: {record.hot_start_iter}")
    print(f"final metric (avg squared z-score): {record.final_metric}")
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    if record.status != "ok":
        print(f"error: {record.error}", file=sys.stderr)
        return EXIT_CODES.get(record.status, 1)
    return 0


def _cmd_sweep(args) -> int:
    config = build_config(args)
    methods = args.methods.split(",") if args.methods else None
    grid = [float(v) for v in args.grid.split(",")] if args.grid else None
    kwargs = {}
    if methods:
        kwargs["methods"] = methods
    if grid:
        kwargs["grid"] = grid
    out_dir = default_output_dir(config)
    table = run_sweep(config, n_seeds=args.seeds, out_dir=out_dir, **kwargs)
    for row in sorted(table, key=lambda r: (r["optimizer"], r["param"])):
        print(f"{row['optimizer']:>14} param={row['param']:<8g} "
              f"median={row['median_final_metric']:.6g} "
              f"ratio={row['ratio_vs_baseline']:.4g}")
    print(f"wrote {out_dir}/sweep_table.csv")
    return 0


def _cmd_rate(args) -> int:
    config = build_config(args)
    result = rate_experiment(config, n_seeds=args.seeds,
                             window=(args.window_lo, args.window_hi))
    print(f"median final KL: {result.median_final_kl:.6g}")
    print(f"mean log-log slope over [{args.window_lo:g}, {args.window_hi:g}]: "
          f"{result.mean_slope:.4f}")
    if result.clamped:
        print("warning: KL values were clamped at the floor", file=sys.stderr)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"slopes": result.slopes, "mean_slope": result.mean_slope,
                       "final_kls": result.final_kls,
                       "median_final_kl": result.median_final_kl,
                       "window": list(result.window), "clamped": result.clamped},
                      fh, indent=2)
        print(f"wrote {args.out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="coresetmcmc",
                                     description="Coreset MCMC weight-learning runs")
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run one configuration")
    _add_config_flags(run_parser)

    sweep_parser = sub.add_parser("sweep", help="run the optimizer/parameter grid")
    _add_config_flags(sweep_parser)
    sweep_parser.add_argument("--seeds", type=int, default=10)
    sweep_parser.add_argument("--methods", help="comma-separated optimizer kinds")
    sweep_parser.add_argument("--grid", help="comma-separated scale parameters")

    rate_parser = sub.add_parser("rate", help="empirical KL decay-rate experiment")
    _add_config_flags(rate_parser)
    rate_parser.add_argument("--seeds", type=int, default=10)
    rate_parser.add_argument("--window-lo", dest="window_lo", type=float, default=1e3)
    rate_parser.add_argument("--window-hi", dest="window_hi", type=float, default=1e4)

    args = parser.parse_args(argv)
    handler = {"run": _cmd_run, "sweep": _cmd_sweep, "rate": _cmd_rate}[args.command]
    try:
        return handler(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES["ValueError"]
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_CODES["NumericalError"]
    except ReferenceFailure as exc:
        print(f"reference failure: {exc}", file=sys.stderr)
        return EXIT_CODES["ReferenceFailure"]
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_CODES["OSError"]


if __name__ == "__main__":
    raise SystemExit(main())
