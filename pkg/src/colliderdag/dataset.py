"""Numeric data matrices: CSV ingestion, validation and the non-Gaussian
synthetic generator with recorded ground truth.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConstantColumnError, CsvParseError, DatasetError, SynthSpecError

MIN_ROWS = 4
MIN_COLS = 3

BASE_DISTRIBUTIONS = (
    "uniform",
    "exponential",
    "normal",
    "lognormal",
    "laplace",
    "student_t3",
    "student_t5",
)
# 1-based base-kind pairs in lexicographic order; 21 of them.
MIXTURE_PAIRS = tuple(itertools.combinations(range(1, 8), 2))
N_KINDS = 7 + 2 * len(MIXTURE_PAIRS)

DEFAULT_COEFF_INTERVALS = ((-5.0, -0.5), (0.5, 3.0))
DEFAULT_CONFOUNDER_INTERVAL = (-2.0, 3.0)
ASYMMETRIC_WEIGHT_INTERVALS = ((0.1, 0.45), (0.55, 0.9))
SOURCE_FRACTION = 0.40


@dataclass(eq=False)
class Dataset:
    """An ``m x n`` matrix of observations with one label per column."""

    values: np.ndarray
    names: list[str]

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, order="F")
        if values.ndim != 2:
            raise DatasetError(f"expected a 2-d matrix, got shape {values.shape}")
        m, n = values.shape
        if len(self.names) != n:
            raise DatasetError(f"{len(self.names)} names for {n} columns")
        if m < MIN_ROWS or n < MIN_COLS:
            raise DatasetError(
                f"need at least {MIN_ROWS} rows and {MIN_COLS} columns, got {m}x{n}"
            )
        if not np.all(np.isfinite(values)):
            r, c = np.argwhere(~np.isfinite(values))[0]
            raise DatasetError(f"non-finite value at row {r}, column {self.names[c]!r}")
        std = values.std(axis=0)
        for c in range(n):
            if not std[c] > 0.0:
                raise ConstantColumnError(self.names[c])
        values.setflags(write=False)
        self.values = values
        self.names = [str(s) for s in self.names]

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def column(self, key) -> np.ndarray:
        if isinstance(key, str):
            key = self.names.index(key)
        return self.values[:, key]


def default_names(n: int) -> list[str]:
    return [f"x{i}" for i in range(n)]


def load_csv(
    path,
    has_header: bool = True,
    drop_columns: Sequence[str] = (),
) -> Dataset:
    """Read a comma-separated numeric matrix.

    Parameters
    ----------
    path : str or Path
        UTF-8 file, ``.`` decimal separator.
    has_header : bool
        Whether the first row holds column labels. Without a header the
        columns are labelled ``x0, x1, ...``.
    drop_columns : sequence of str
        Labels of columns to discard before parsing, e.g. a binary
        indicator that should not enter the model.

    Raises
    ------
    CsvParseError
        A retained cell is not a finite real; row and column are reported.
    ConstantColumnError
        A retained column has zero variance.
    DatasetError
        Too few rows or columns, ragged rows, or unknown drop labels.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    if not rows:
        raise DatasetError(f"{path}: empty file")

    if has_header:
        names = [h.strip() for h in rows[0]]
        body = rows[1:]
        first_row = 2
    else:
        names = default_names(len(rows[0]))
        body = rows
        first_row = 1

    unknown = [c for c in drop_columns if c not in names]
    if unknown:
        raise DatasetError(f"drop_columns not found in {path}: {unknown}")
    keep = [c for c, name in enumerate(names) if name not in set(drop_columns)]

    values = np.empty((len(body), len(keep)))
    for r, row in enumerate(body):
        if len(row) != len(names):
            raise DatasetError(
                f"{path}: row {r + first_row} has {len(row)} fields, expected {len(names)}"
            )
        for out_c, c in enumerate(keep):
            cell = row[c].strip()
            try:
                x = float(cell)
            except ValueError:
                x = math.nan
            if not math.isfinite(x):
                raise CsvParseError(path, r + first_row, names[c], cell)
            values[r, out_c] = x
    return Dataset(values, [names[c] for c in keep])


def write_csv(path, data: Dataset) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(data.names)
        for row in data.values:
            w.writerow([repr(float(x)) for x in row])


def _uniform_union(rng: np.random.Generator, intervals, size=None):
    """Uniform draw over a union of disjoint closed intervals."""
    lo = np.array([a for a, _ in intervals])
    width = np.array([b - a for a, b in intervals])
    pick = rng.choice(len(intervals), size=size, p=width / width.sum())
    return lo[pick] + width[pick] * rng.random(size=size)


def _sample_base(kind: int, count: int, rng: np.random.Generator) -> np.ndarray:
    if kind == 1:
        return rng.uniform(-1.0, 1.0, count)
    if kind == 2:
        return rng.exponential(1.0, count)
    if kind == 3:
        return rng.standard_normal(count)
    if kind == 4:
        return rng.lognormal(0.0, 1.0, count)
    if kind == 5:
        return rng.laplace(0.0, 1.0, count)
    if kind == 6:
        return rng.standard_t(3, count)
    if kind == 7:
        return rng.standard_t(5, count)
    raise ValueError(f"not a base distribution kind: {kind}")


def mixture_components(kind: int) -> tuple[int, int, bool]:
    """Return ``(first, second, symmetric)`` for a mixture kind in 8..49."""
    if 8 <= kind <= 28:
        a, b = MIXTURE_PAIRS[kind - 8]
        return a, b, True
    if 29 <= kind <= 49:
        a, b = MIXTURE_PAIRS[kind - 29]
        return a, b, False
    raise ValueError(f"not a mixture kind: {kind}")


def sample_distribution(kind: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` i.i.d. values from distribution type ``kind``.

    Kinds 1-7 are Uniform(-1, 1), Exponential(1), Normal(0, 1),
    LogNormal(0, 1), Laplace(0, 1), Student-t(3) and Student-t(5). Kinds
    8-28 are 50/50 mixtures of each pair of distinct base kinds in
    lexicographic order; kinds 29-49 are the same pairs with the weight of
    the first component drawn once from [0.1, 0.45] U [0.55, 0.9].
    """
    kind = int(kind)
    if not 1 <= kind <= N_KINDS:
        raise ValueError(f"distribution kind must be in 1..{N_KINDS}, got {kind}")
    if kind <= 7:
        return _sample_base(kind, count, rng)
    a, b, symmetric = mixture_components(kind)
    weight = 0.5 if symmetric else float(_uniform_union(rng, ASYMMETRIC_WEIGHT_INTERVALS))
    first = rng.random(count) < weight
    out = _sample_base(b, count, rng)
    out[first] = _sample_base(a, count, rng)[first]
    return out


@dataclass(frozen=True)
class SynthSpec:
    m: int
    n: int
    seed: int = 0
    source_fraction: float = SOURCE_FRACTION
    coeff_intervals: tuple = DEFAULT_COEFF_INTERVALS
    confounder_interval: tuple = DEFAULT_CONFOUNDER_INTERVAL

    @property
    def n_sources(self) -> int:
        return int(math.floor(self.source_fraction * self.n + 0.5))

    def validate(self) -> None:
        if self.m < MIN_ROWS:
            raise SynthSpecError(f"m must be >= {MIN_ROWS}, got {self.m}")
        if self.n < MIN_COLS:
            raise SynthSpecError(f"n must be >= {MIN_COLS}, got {self.n}")
        if self.n_sources < 2:
            raise SynthSpecError(
                f"n={self.n} gives {self.n_sources} source variable(s); need at least 2"
            )
        for a, b in (*self.coeff_intervals, self.confounder_interval):
            if not a <= b:
                raise SynthSpecError(f"bad interval [{a}, {b}]")


@dataclass(eq=False)
class GroundTruth:
    """Generating parameters of a synthetic dataset.

    ``adjacency[p, q]`` is the coefficient of variable ``p`` in the model of
    variable ``q``; zero means no edge. ``dist_kinds[q]`` is the sampling
    kind of a source column, or the noise kind of a mixture column.
    """

    adjacency: np.ndarray
    confounders: np.ndarray
    dist_kinds: list[int]
    n_sources: int
    names: list[str] = field(default_factory=list)
    seed: int | None = None

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def edges(self) -> list[tuple[int, int]]:
        return [tuple(map(int, e)) for e in np.argwhere(self.adjacency != 0.0)]

    def to_json(self) -> dict:
        return {
            "names": list(self.names),
            "n": self.n,
            "n_sources": self.n_sources,
            "seed": self.seed,
            "adjacency": self.adjacency.tolist(),
            "confounders": self.confounders.tolist(),
            "kinds": list(self.dist_kinds),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GroundTruth":
        adjacency = np.asarray(obj["adjacency"], dtype=np.float64)
        n = adjacency.shape[0]
        return cls(
            adjacency=adjacency,
            confounders=np.asarray(obj.get("confounders", np.zeros(n)), dtype=np.float64),
            dist_kinds=[int(k) for k in obj.get("kinds", [])],
            n_sources=int(obj.get("n_sources", 0)),
            names=list(obj.get("names") or default_names(n)),
            seed=obj.get("seed"),
        )


def synth_dataset(spec: SynthSpec) -> tuple[Dataset, GroundTruth]:
    """Generate a noisy linear-mixture dataset.

    The first ``round(0.4 n)`` columns are i.i.d. draws from random kinds.
    Every later column is ``c1 * parent1 + c2 * parent2 + confounder + noise``
    over two distinct earlier columns, with the noise column drawn from a
    random kind. Output depends only on ``spec``.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    m, n, k = spec.m, spec.n, spec.n_sources

    values = np.empty((m, n))
    adjacency = np.zeros((n, n))
    confounders = np.zeros(n)
    kinds = []

    for q in range(k):
        kind = int(rng.integers(1, N_KINDS + 1))
        kinds.append(kind)
        values[:, q] = sample_distribution(kind, m, rng)

    for q in range(k, n):
        parents = np.sort(rng.choice(q, size=2, replace=False))
        coeffs = _uniform_union(rng, spec.coeff_intervals, size=2)
        lo, hi = spec.confounder_interval
        conf = float(rng.uniform(lo, hi))
        kind = int(rng.integers(1, N_KINDS + 1))
        kinds.append(kind)
        noise = sample_distribution(kind, m, rng)
        values[:, q] = (
            coeffs[0] * values[:, parents[0]] + coeffs[1] * values[:, parents[1]] + conf + noise
        )
        adjacency[parents, q] = coeffs
        confounders[q] = conf

    names = default_names(n)
    truth = GroundTruth(adjacency, confounders, kinds, k, names, spec.seed)
    return Dataset(values, names), truth
