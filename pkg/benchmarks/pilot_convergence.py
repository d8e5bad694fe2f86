"""Pilot run backing the convergence acceptance thresholds.

Runs the desk-scale location-model instance (N=1000, d=2, M=20, exact kernel,
hot-started coordinate-wise optimizer at r=1e-3, T=20000, 10 seeds) in two
gradient regimes and records the per-seed final KL and log-log decay slopes:

  * full:      full-data gradient (subsample = N), isolating the optimizer's
               decay rate from subsample noise; this is the regime the
               convergence criterion (median final KL < 1e-2, slope <= -0.4)
               is calibrated against, with orders-of-magnitude headroom.
  * default:   subsample = M (the run-loop default). The N/S = 50 noise
               amplification puts an irreducible floor around 1e-1 on the
               final KL at this horizon for every optimizer tested, so the
               KL threshold is not meaningful in this regime; the numbers are
               recorded here for transparency.

Usage: python benchmarks/pilot_convergence.py [out.json]
"""

import json
import sys
import time

from coresetmcmc import RunConfig, rate_experiment

BASE = dict(model="gaussian_location", n=1000, dim=2, coreset_size=20,
            optimizer="hotdog", r=1e-3, iters=20_000, metric_stride=50,
            track_kl=True, seed=0)

WINDOW = (1e3, 1e4)


def run_regime(subsample):
    config = RunConfig(**BASE, subsample=subsample)
    start = time.perf_counter()
    result = rate_experiment(config, n_seeds=10, window=WINDOW)
    elapsed = time.perf_counter() - start
    return {
        "subsample": subsample if subsample is not None else BASE["coreset_size"],
        "final_kls": result.final_kls,
        "median_final_kl": result.median_final_kl,
        "slopes": result.slopes,
        "mean_slope": result.mean_slope,
        "window": list(result.window),
        "seconds": round(elapsed, 1),
    }


def main():
    out_path = sys.argv[1] if len(sys.argv) > 1 else "benchmarks/pilot_convergence.json"
    payload = {
        "instance": BASE,
        "regimes": {
            "full": run_regime(1000),
            "default": run_regime(None),
        },
        "frozen_thresholds": {"median_final_kl": 1e-2, "mean_slope": -0.4},
    }
    with open(out_path, "w") as fh:
        json.dump(payload, fh, indent=2)
    for name, regime in payload["regimes"].items():
        print(f"{name:8s} median final KL {regime['median_final_kl']:.3e} "
              f"mean slope {regime['mean_slope']:+.3f} ({regime['seconds']}s)")
    print(f"wrote {out_path}")


if __name__ == "__main__":
    main()
