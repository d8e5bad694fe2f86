"""Render figures from coresetmcmc run outputs.

Inputs are the run CSVs written by the harness (columns: iter, avg_sq_z,
grad_norm, test_stat, hot_started, wall_ms) together with their JSON
sidecars. Three figure kinds are supported:

  trace:    metric traces over iterations, one median line per group
  hotstart: gradient-norm and test-statistic traces with the threshold line
  ratio:    median-final-metric ratios of each group against a baseline group
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from glob import glob
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

CSV_COLUMNS = ("iter", "avg_sq_z", "grad_norm", "test_stat", "hot_started", "wall_ms")

FIGURE_KINDS = ("trace", "hotstart", "ratio")


class InputError(ValueError):
    """Missing inputs or inputs that do not follow the run-output schema."""


@dataclass
class FigureSpec:
    inputs: str
    kind: str
    out: str
    group_by: tuple[str, ...] = ("optimizer",)
    baseline: dict = field(default_factory=lambda: {"optimizer": "hotdog"})

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise InputError(f"unknown figure kind {self.kind!r}")
        if isinstance(self.group_by, (list, str)):
            self.group_by = tuple([self.group_by] if isinstance(self.group_by, str)
                                  else self.group_by)


@dataclass
class Run:
    """One run's time series plus its sidecar metadata."""

    table: dict
    config: dict
    sidecar: dict

    def group_key(self, keys):
        return tuple(str(self.config.get(k)) for k in keys)


def load_run(csv_path) -> Run:
    csv_path = Path(csv_path)
    json_path = csv_path.with_suffix(".json")
    if not json_path.exists():
        raise InputError(f"{csv_path} has no JSON sidecar")
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise InputError(f"{csv_path}: expected columns {CSV_COLUMNS}, got {header}")
        rows = [row for row in reader if row]
    if not rows:
        raise InputError(f"{csv_path}: no data rows")
    try:
        data = np.array([[float(v) for v in row] for row in rows])
    except ValueError as exc:
        raise InputError(f"{csv_path}: non-numeric cell ({exc})")
    table = {name: data[:, i] for i, name in enumerate(CSV_COLUMNS)}
    sidecar = json.loads(json_path.read_text())
    if "config" not in sidecar:
        raise InputError(f"{json_path}: sidecar missing config block")
    return Run(table=table, config=sidecar["config"], sidecar=sidecar)


def load_runs(pattern) -> list[Run]:
    paths = sorted(glob(str(pattern)))
    if not paths:
        raise InputError(f"no inputs match {pattern!r}")
    return [load_run(p) for p in paths]


def group_runs(runs, keys):
    groups: dict[tuple, list[Run]] = {}
    for run in runs:
        groups.setdefault(run.group_key(keys), []).append(run)
    return dict(sorted(groups.items()))


def _median_series(runs, column):
    """Median of a column across runs, aligned on the iteration axis."""
    iters = runs[0].table["iter"]
    stacked = []
    for run in runs:
        if run.table["iter"].shape != iters.shape or not np.array_equal(run.table["iter"], iters):
            raise InputError("runs in one group must share their iteration grid")
        stacked.append(run.table[column])
    return iters, np.median(np.vstack(stacked), axis=0)


def final_metric_median(runs) -> float:
    values = []
    for run in runs:
        final = run.sidecar.get("final_metric")
        if final is None:
            final = float(run.table["avg_sq_z"][-1])
        values.append(float(final))
    return float(np.median(values))


def _label(key):
    return ", ".join(key)


def render(spec: FigureSpec) -> Path:
    """Render one figure; returns the written image path."""
    runs = load_runs(spec.inputs)
    groups = group_runs(runs, spec.group_by)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))

    if spec.kind == "trace":
        for key, members in groups.items():
            iters, med = _median_series(members, "avg_sq_z")
            ax.plot(iters, med, label=_label(key))
        ax.set_yscale("log")
        ax.set_xlabel("iteration")
        ax.set_ylabel("avg squared z-score")
        ax.legend(fontsize=8)
    elif spec.kind == "hotstart":
        for key, members in groups.items():
            iters, grad = _median_series(members, "grad_norm")
            _, stat = _median_series(members, "test_stat")
            ax.plot(iters, grad, color="tab:blue", label=f"grad norm ({_label(key)})")
            ax.plot(iters, stat, color="tab:green", label=f"test stat ({_label(key)})")
        threshold = runs[0].config.get("threshold", 0.5)
        ax.axhline(threshold, color="tab:orange", linestyle="--",
                   label=f"threshold {threshold}")
        ax.set_yscale("log")
        ax.set_xlabel("iteration")
        ax.legend(fontsize=8)
    else:
        baseline_key = tuple(str(v) for v in spec.baseline.values())
        baseline_runs = None
        for key, members in groups.items():
            candidate = {k: str(members[0].config.get(k)) for k in spec.baseline}
            if candidate == {k: str(v) for k, v in spec.baseline.items()}:
                baseline_runs = members
                break
        if baseline_runs is None:
            raise InputError(f"no group matches the baseline {spec.baseline}")
        base_median = final_metric_median(baseline_runs)
        labels, ratios = [], []
        for key, members in groups.items():
            labels.append(_label(key))
            ratios.append(final_metric_median(members) / base_median)
        ax.bar(range(len(ratios)), ratios, color="tab:blue")
        ax.set_xticks(range(len(ratios)), labels, rotation=30, ha="right", fontsize=8)
        ax.axhline(1.0, color="black")
        ax.set_yscale("log")
        ax.set_ylabel(f"metric ratio vs {baseline_key}")

    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(out, dpi=120, metadata={"Software": "coresetmcmc-plots"})
    plt.close(fig)
    return out


def compute_ratios(spec: FigureSpec) -> dict[tuple, float]:
    """The ratio table behind the ratio figure, for callers that want numbers."""
    runs = load_runs(spec.inputs)
    groups = group_runs(runs, spec.group_by)
    baseline_runs = None
    for members in groups.values():
        candidate = {k: str(members[0].config.get(k)) for k in spec.baseline}
        if candidate == {k: str(v) for k, v in spec.baseline.items()}:
            baseline_runs = members
            break
    if baseline_runs is None:
        raise InputError(f"no group matches the baseline {spec.baseline}")
    base = final_metric_median(baseline_runs)
    return {key: final_metric_median(members) / base for key, members in groups.items()}
