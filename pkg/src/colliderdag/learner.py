"""Collider-triple structure learner.

Every triple of variables is fitted three ways, each fit's parent shares
are NPM-mapped, and per ordered pair ``p -> q`` the coefficient with the
largest mapped share seen so far is kept. A final pairwise sweep keeps only
the stronger direction of each pair.
"""
from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import chain, combinations
from typing import NamedTuple

import numpy as np

from . import _backend
from .dataset import Dataset
from .errors import DegenerateDenominatorError, EmptyResultError
from .npm import contributions, denominator_floor
from .regression import TripleIndex, augmented_gram, fit_triple

log = logging.getLogger(__name__)

SKIP_REASONS = {
    _backend.SINGULAR: "singular normal equations",
    _backend.DEGENERATE_DENOM: "target column sum near zero",
    _backend.UNDEFINED: "all contributions zero",
}


@dataclass(frozen=True)
class LearnConfig:
    seed: int = 0
    eps_tie: float = 1e-9
    min_strength: float = 0.0
    min_pcnt: float = 0.0
    parallel: bool = False
    backend: str | None = None
    workers: int | None = None

    def __post_init__(self):
        if not self.eps_tie >= 0:
            raise ValueError(f"eps_tie must be >= 0, got {self.eps_tie}")
        if not 0.0 <= self.min_pcnt <= 1.0:
            raise ValueError(f"min_pcnt must lie in [0, 1], got {self.min_pcnt}")
        if not self.min_strength >= 0:
            raise ValueError(f"min_strength must be >= 0, got {self.min_strength}")


class PairScore(NamedTuple):
    source: int
    target: int
    coefficient: float
    contribution: float
    intercept: float


@dataclass(eq=False)
class LearnState:
    """Running STRN/DRCT/PCNT/ERR matrices plus skipped triples."""

    strn: np.ndarray
    drct: np.ndarray
    pcnt: np.ndarray
    err: np.ndarray
    skipped: list = field(default_factory=list)

    @classmethod
    def zeros(cls, n: int) -> "LearnState":
        return cls(
            strn=np.zeros((n, n)),
            drct=np.zeros((n, n), dtype=np.int64),
            pcnt=np.zeros((n, n)),
            err=np.zeros(n),
        )

    @property
    def n(self) -> int:
        return self.strn.shape[0]

    def copy(self) -> "LearnState":
        return replace(
            self,
            strn=self.strn.copy(),
            drct=self.drct.copy(),
            pcnt=self.pcnt.copy(),
            err=self.err.copy(),
            skipped=list(self.skipped),
        )


@dataclass(eq=False)
class LearnOutput(LearnState):
    """Finalized state plus diagnostics of the run."""

    names: list = field(default_factory=list)
    pre_sweep_strn: np.ndarray | None = None
    pre_sweep_pcnt: np.ndarray | None = None
    n_triples: int = 0
    timings: dict = field(default_factory=dict)
    backend: str = ""


def enumerate_triples(n: int, seed: int = 0) -> np.ndarray:
    """All ``C(n, 3)`` triples (ascending within a row) in seeded random order.

    Returns an int64 array of shape ``(C(n, 3), 3)``.
    """
    if n < 3:
        raise ValueError(f"need at least 3 variables, got {n}")
    count = n * (n - 1) * (n - 2) // 6
    canon = np.fromiter(
        chain.from_iterable(combinations(range(n), 3)), dtype=np.int64, count=3 * count
    ).reshape(-1, 3)
    order = np.random.default_rng(seed).permutation(len(canon))
    return np.ascontiguousarray(canon[order])


def score_triple(data: Dataset, t) -> list[PairScore]:
    """Scores of the six ordered pairs of triple ``t``.

    The pair ``p -> q`` carries coefficient of ``p`` and its mapped share
    from the fit whose target is ``q``, along with that fit's intercept.

    Raises
    ------
    DegenerateTripleError
        Singular fit or near-zero target sum; the caller records a skip.
    """
    tf = fit_triple(data, t)
    out = []
    for f in tf.fits:
        eps = denominator_floor(data.m, float(data.column(f.target).std()))
        try:
            cv = contributions(f, eps)
        except DegenerateDenominatorError as exc:
            exc.triple = tf.index
            raise
        for slot, p in enumerate(f.parents):
            out.append(PairScore(p, f.target, f.coeffs[slot], cv.mapped[slot], f.intercept))
    return out


def update_threshold(state: LearnState, scores) -> LearnState:
    """Keep, per ordered pair, the coefficient with the largest mapped share.

    Strictly greater shares win; each win bumps the pair's DRCT count and
    sets ERR of the target to the winning fit's intercept.
    """
    new = state.copy()
    for s in scores:
        p, q = s.source, s.target
        if s.contribution > new.pcnt[p, q]:
            new.pcnt[p, q] = s.contribution
            new.strn[p, q] = s.coefficient
            new.drct[p, q] += 1
            new.err[q] = s.intercept
    return new


def _sweep_inplace(strn, drct, pcnt, eps_tie: float) -> None:
    fwd, rev = pcnt, pcnt.T
    weaker = rev > fwd + eps_tie
    tied = (np.abs(fwd - rev) <= eps_tie) & (fwd > 0.0) & (rev > 0.0)
    lose = weaker | tied
    strn[lose] = 0.0
    drct[lose] = 0
    pcnt[lose] = 0.0


def anti_cycle_sweep(state: LearnState, eps_tie: float = 1e-9) -> LearnState:
    """Zero the weaker direction of every node pair; zero both on a tie.

    ERR is per node and left untouched.
    """
    new = state.copy()
    _sweep_inplace(new.strn, new.drct, new.pcnt, eps_tie)
    return new


def _prune(out: LearnState, min_strength: float, min_pcnt: float) -> None:
    if min_strength <= 0.0 and min_pcnt <= 0.0:
        return
    drop = (np.abs(out.strn) < min_strength) | (out.pcnt < min_pcnt)
    out.strn[drop] = 0.0
    out.drct[drop] = 0
    out.pcnt[drop] = 0.0


def _score_all(kernels, gram, eps, triples, parallel: bool, workers: int | None):
    k = len(triples)
    coef = np.zeros((k, 6))
    mapped = np.zeros((k, 6))
    icpt = np.zeros((k, 3))
    status = np.zeros(k, dtype=np.int8)
    fail_pos = np.zeros(k, dtype=np.int8)
    if not parallel or k < 2:
        kernels.score_batch(gram, eps, triples, coef, mapped, icpt, status, fail_pos)
    else:
        workers = workers or os.cpu_count() or 1
        bounds = np.linspace(0, k, min(k, 4 * workers) + 1).astype(int)
        # Disjoint row blocks; the reduction below stays sequential.
        with ThreadPoolExecutor(max_workers=workers) as pool:
            jobs = [
                pool.submit(
                    kernels.score_batch, gram, eps, triples[a:b], coef[a:b],
                    mapped[a:b], icpt[a:b], status[a:b], fail_pos[a:b],
                )
                for a, b in zip(bounds[:-1], bounds[1:])
                if b > a
            ]
            for j in jobs:
                j.result()
    return coef, mapped, icpt, status, fail_pos


def learn(data: Dataset, config: LearnConfig = LearnConfig()) -> LearnOutput:
    """Run the full learner on ``data``.

    Triples are visited in a seeded shuffle. Scoring may run in parallel;
    threshold updates are always replayed in visit order, so every output
    matrix (DRCT included) is identical between sequential and parallel runs.

    Raises
    ------
    EmptyResultError
        If every triple had to be skipped.
    """
    backend_name = config.backend or _backend.default_backend()
    kernels = _backend.get(backend_name)
    timings = {}
    n = data.n

    t0 = time.perf_counter()
    gram = np.ascontiguousarray(augmented_gram(data.values))
    eps = np.ascontiguousarray(
        [denominator_floor(data.m, s) for s in data.values.std(axis=0)], dtype=np.float64
    )
    triples = enumerate_triples(n, config.seed)
    t1 = time.perf_counter()
    timings["prepare"] = t1 - t0

    coef, mapped, icpt, status, fail_pos = _score_all(
        kernels, gram, eps, triples, config.parallel, config.workers
    )
    t2 = time.perf_counter()
    timings["score"] = t2 - t1

    state = LearnState.zeros(n)
    kernels.replay(triples, coef, mapped, icpt, status, state.strn, state.drct, state.pcnt, state.err)
    for row in np.flatnonzero(status != _backend.OK):
        tri = TripleIndex(*map(int, triples[row]))
        target = data.names[tri[int(fail_pos[row])]]
        state.skipped.append((tri, f"{SKIP_REASONS[int(status[row])]} (target {target})"))
    t3 = time.perf_counter()
    timings["update"] = t3 - t2

    if len(state.skipped) == len(triples):
        raise EmptyResultError(f"all {len(triples)} triples were skipped")
    if state.skipped:
        log.warning("skipped %d of %d triples", len(state.skipped), len(triples))

    pre_strn, pre_pcnt = state.strn.copy(), state.pcnt.copy()
    _sweep_inplace(state.strn, state.drct, state.pcnt, config.eps_tie)
    _prune(state, config.min_strength, config.min_pcnt)
    timings["finalize"] = time.perf_counter() - t3

    return LearnOutput(
        strn=state.strn,
        drct=state.drct,
        pcnt=state.pcnt,
        err=state.err,
        skipped=state.skipped,
        names=list(data.names),
        pre_sweep_strn=pre_strn,
        pre_sweep_pcnt=pre_pcnt,
        n_triples=len(triples),
        timings=timings,
        backend=backend_name,
    )
