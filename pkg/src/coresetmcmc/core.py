"""Shared domain types: datasets, coreset selection, weight init, log-potentials."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError

DATASET_KINDS = ("regression", "classification", "counts", "pairwise", "location")

PAIRWISE_COLUMNS = ("home_id", "visitor_id", "outcome")


@dataclass
class Dataset:
    """N observations: feature rows, optional responses, or pairwise records.

    ``kind`` fixes the response convention: real responses for regression,
    {0,1} labels for classification, nonnegative integer counts, game
    outcomes plus (home, visitor) entity ids for pairwise comparisons, and
    bare observation rows for location (the rows themselves are the data).
    """

    kind: str
    features: np.ndarray | None = None
    responses: np.ndarray | None = None
    pair_ids: np.ndarray | None = None
    n_entities: int | None = None

    def __post_init__(self):
        if self.kind not in DATASET_KINDS:
            raise ValueError(f"unknown dataset kind {self.kind!r}")
        if self.features is not None:
            self.features = np.atleast_2d(np.asarray(self.features, dtype=float))
        if self.responses is not None:
            self.responses = np.asarray(self.responses, dtype=float)
        if self.pair_ids is not None:
            self.pair_ids = np.asarray(self.pair_ids, dtype=int).reshape(-1, 2)
        if self.n < 1:
            raise ValueError("dataset must contain at least one observation")
        if self.kind == "location":
            if self.features is None:
                raise ValueError("location datasets store observations as feature rows")
        elif self.kind == "pairwise":
            if self.pair_ids is None or self.responses is None:
                raise ValueError("pairwise datasets need pair_ids and outcomes")
            if self.n_entities is None:
                self.n_entities = int(self.pair_ids.max()) + 1
            if (self.pair_ids < 0).any() or (self.pair_ids >= self.n_entities).any():
                raise ValueError("pair ids must lie in [0, n_entities)")
            if not np.isin(self.responses, (0.0, 1.0)).all():
                raise ValueError("pairwise outcomes must be 0/1")
        else:
            if self.responses is None:
                raise ValueError(f"{self.kind} datasets need a response vector")
            if self.kind == "classification" and not np.isin(self.responses, (0.0, 1.0)).all():
                raise ValueError("classification responses must be 0/1")
            if self.kind == "counts":
                y = self.responses
                if (y < 0).any() or not np.allclose(y, np.round(y)):
                    raise ValueError("count responses must be nonnegative integers")
        if self.features is not None and self.responses is not None:
            if self.features.shape[0] != self.responses.shape[0]:
                raise ValueError("features and responses disagree on N")

    @property
    def n(self) -> int:
        if self.features is not None:
            return self.features.shape[0]
        if self.pair_ids is not None:
            return self.pair_ids.shape[0]
        if self.responses is not None:
            return self.responses.shape[0]
        return 0

    @property
    def n_features(self) -> int:
        return 0 if self.features is None else self.features.shape[1]


@dataclass
class CoresetSelection:
    """Distinct indices into [N] naming the data points that carry weights."""

    indices: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=int)
        if self.indices.ndim != 1 or self.indices.size < 1:
            raise ValueError("selection must be a nonempty index vector")
        if np.unique(self.indices).size != self.indices.size:
            raise ValueError("coreset indices must be distinct")

    @property
    def m(self) -> int:
        return self.indices.size


@dataclass
class ChainEnsemble:
    """K Markov-chain states plus the per-chain log-potential history."""

    states: list
    potential_history: list[list[float]] = field(default_factory=list)

    def __post_init__(self):
        if len(self.states) < 2:
            raise ValueError("the gradient estimator needs at least two chains")
        if not self.potential_history:
            self.potential_history = [[] for _ in self.states]
        lengths = {len(h) for h in self.potential_history}
        if len(self.potential_history) != len(self.states) or len(lengths) > 1:
            raise ValueError("potential histories must be one equal-length trace per chain")

    @property
    def k(self) -> int:
        return len(self.states)


def select_coreset(dataset: Dataset, m: int, *, balance: bool = False, rng) -> CoresetSelection:
    """Pick m distinct data indices, uniformly or label-balanced.

    Balanced selection (classification only): when m exceeds twice the
    positive count, keep every positive and fill with uniform negatives;
    otherwise draw ceil(m/2) positives and floor(m/2) negatives uniformly.
    Indices are returned sorted; any order is a valid uniform draw of the set.
    """
    n = dataset.n
    if not 1 <= m <= n:
        raise ValueError(f"coreset size {m} must lie in [1, {n}]")
    if not balance:
        return CoresetSelection(np.sort(rng.choice(n, size=m, replace=False)))
    if dataset.kind != "classification":
        raise ValueError("label balancing only applies to classification datasets")
    positives = np.flatnonzero(dataset.responses == 1)
    negatives = np.flatnonzero(dataset.responses == 0)
    if m > 2 * positives.size:
        n_neg = m - positives.size
        if n_neg > negatives.size:
            raise ValueError("not enough negative observations to balance the coreset")
        chosen_pos = positives
        chosen_neg = rng.choice(negatives, size=n_neg, replace=False)
    else:
        n_pos = -(-m // 2)
        n_neg = m // 2
        if n_neg > negatives.size:
            raise ValueError("not enough negative observations to balance the coreset")
        chosen_pos = rng.choice(positives, size=n_pos, replace=False)
        chosen_neg = rng.choice(negatives, size=n_neg, replace=False)
    return CoresetSelection(np.sort(np.concatenate([chosen_pos, chosen_neg])))


def init_weights(n: int, m: int) -> np.ndarray:
    """Uniform initial weights n/m, so the weighted likelihood matches full-data scale."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    return np.full(m, n / m, dtype=float)


def loglik_table(model, dataset: Dataset, indices, states) -> np.ndarray:
    """Evaluate per-datum log-likelihoods for every (index, chain state) pair.

    Returns a len(indices) x K matrix; one batched call per chain keeps the
    per-iteration evaluation layout in one place.
    """
    indices = np.asarray(indices, dtype=int)
    cols = [model.loglik(dataset, indices, state) for state in states]
    return np.column_stack(cols)


def log_potential(w, theta, model, dataset: Dataset, selection: CoresetSelection) -> float:
    """Weighted coreset log-likelihood sum_m w_m l_m(theta).

    -inf terms are legal (zero density) unless their weight is zero, in which
    case they contribute nothing; NaN terms are an error.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (selection.m,):
        raise ValueError("weight vector length must match the coreset size")
    ll = model.loglik(dataset, selection.indices, theta)
    if np.isnan(ll).any():
        raise NumericalError("NaN log-likelihood term")
    active = w != 0.0
    if not active.all():
        ll = ll[active]
        w = w[active]
        if w.size == 0:
            return 0.0
    return float(w @ ll)


def load_csv(path, kind: str, response_col: str | None = None) -> Dataset:
    """Ingest a dataset from CSV with a header row.

    Regression/classification/counts files name their response column via
    ``response_col``; pairwise files carry home_id, visitor_id, outcome
    columns; location files are all-feature. Parsing uses the C locale
    (decimal point) regardless of the environment.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: missing header row")
        header = [h.strip() for h in header]
        rows = [row for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    values = np.array([[float(v) for v in row] for row in rows])
    if values.shape[1] != len(header):
        raise ValueError(f"{path}: row width does not match header")

    if kind == "pairwise":
        try:
            cols = [header.index(c) for c in PAIRWISE_COLUMNS]
        except ValueError:
            raise ValueError(f"{path}: pairwise files need columns {PAIRWISE_COLUMNS}")
        pair_ids = values[:, cols[:2]].astype(int)
        outcomes = values[:, cols[2]]
        return Dataset(kind=kind, pair_ids=pair_ids, responses=outcomes)
    if kind == "location":
        return Dataset(kind=kind, features=values)
    if response_col is None:
        raise ValueError(f"{kind} datasets need a response_col")
    if response_col not in header:
        raise ValueError(f"{path}: no column named {response_col!r}")
    y_col = header.index(response_col)
    feature_cols = [i for i in range(len(header)) if i != y_col]
    return Dataset(kind=kind, features=values[:, feature_cols], responses=values[:, y_col])
