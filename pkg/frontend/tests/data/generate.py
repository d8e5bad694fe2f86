"""Regenerate the committed fixture outputs consumed by the figure tests.

Produces real harness outputs in the shapes the convergence and
competitiveness experiments emit (shortened horizons keep the files small).
Run from the repository root with the primary package installed:

    python frontend/tests/data/generate.py
"""

from pathlib import Path

from coresetmcmc import RunConfig, build_dataset, emit_outputs, run_coreset_mcmc

OUT = Path(__file__).parent

BASE = dict(model="gaussian_location", n=400, dim=2, coreset_size=10,
            iters=2000, metric_stride=50)


def main():
    dataset = build_dataset(RunConfig(**BASE))
    for seed in (0, 1):
        record = run_coreset_mcmc(RunConfig(**BASE, optimizer="hotdog", r=1e-3,
                                            subsample=400, track_kl=True, seed=seed),
                                  dataset)
        emit_outputs(record, OUT)
    for lr in (1e-2, 1e-1):
        for seed in (0, 1):
            record = run_coreset_mcmc(RunConfig(**BASE, optimizer="adam",
                                                learning_rate=lr, seed=seed), dataset)
            emit_outputs(record, OUT)
    # per-iteration rows so the pre-gate test statistic is visible in figures;
    # kept in a subdirectory because its iteration grid differs from the rest
    stride1 = dict(BASE, iters=200, metric_stride=1)
    record = run_coreset_mcmc(RunConfig(**stride1, optimizer="hotdog", r=1e-3, seed=2),
                              dataset)
    emit_outputs(record, OUT / "hotstart")
    print(f"wrote fixtures under {OUT}")


if __name__ == "__main__":
    main()
