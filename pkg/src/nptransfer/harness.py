"""Monte Carlo sweeps over sample-size grids, CSV persistence and rate fits."""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Any, Iterable, Sequence

import numpy as np

from .adaptive import LEARNERS, AdaptiveConfig, TrialResult, run_adaptive
from .errors import ConfigError, InsufficientDataError, NPTransferError
from .scenario import TransferScenario

__all__ = [
    "SweepConfig",
    "RateFit",
    "run_sweep",
    "fit_rate",
    "mean_excess",
    "write_csv",
    "read_csv",
    "results_to_csv",
    "CSV_HEADER",
]

CSV_HEADER = tuple(f.name for f in fields(TrialResult))
TIE_CHOICES = (None, "n_s", "n_t")


@dataclass(frozen=True)
class SweepConfig:
    """Grid of (n0, n_S, n_T) cells, each run for ``replicates`` seeds.

    ``tie_n0`` sets ``n0`` equal to ``n_s`` or ``n_t`` in every cell instead
    of crossing it with the ``n0`` grid.
    """

    scenario: TransferScenario
    n0: tuple[int, ...] = (1024,)
    n_s: tuple[int, ...] = (0,)
    n_t: tuple[int, ...] = (1024,)
    replicates: int = 1
    seed: int = 0
    adaptive: AdaptiveConfig = AdaptiveConfig()
    learner: str = "adaptive"
    erm_slack: float | None = None
    tie_n0: str | None = None

    def __post_init__(self):
        for name in ("n0", "n_s", "n_t"):
            grid = tuple(int(v) for v in getattr(self, name))
            if not grid or any(v < 0 for v in grid):
                raise ConfigError(f"grid {name} must be a nonempty list of nonnegative counts")
            object.__setattr__(self, name, grid)
        if self.replicates < 1:
            raise ConfigError("replicates must be at least 1")
        if self.learner not in LEARNERS:
            raise ConfigError(f"learner must be one of {LEARNERS}")
        if self.tie_n0 not in TIE_CHOICES:
            raise ConfigError("tie_n0 must be null, 'n_s' or 'n_t'")

    def cells(self) -> list[tuple[int, int, int]]:
        out = set()
        for n0, ns, nt in itertools.product(self.n0, self.n_s, self.n_t):
            if self.tie_n0 == "n_s":
                n0 = ns
            elif self.tie_n0 == "n_t":
                n0 = nt
            out.add((n0, ns, nt))
        return sorted(out)

    def seeds(self) -> range:
        return range(self.seed, self.seed + self.replicates)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "n0": list(self.n0),
            "n_s": list(self.n_s),
            "n_t": list(self.n_t),
            "replicates": self.replicates,
            "seed": self.seed,
            "adaptive": {"c": self.adaptive.c, "delta": self.adaptive.delta, "delta0": self.adaptive.delta0},
            "learner": self.learner,
            "erm_slack": self.erm_slack,
            "tie_n0": self.tie_n0,
        }


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r2: float
    n_grid: tuple[int, ...]
    means: tuple[float, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r2,
            "n_grid": list(self.n_grid),
            "mean_excess": list(self.means),
        }


def _one_trial(args) -> TrialResult:
    cfg, (n0, ns, nt), seed = args
    try:
        return run_adaptive(cfg.scenario, n0, ns, nt, cfg.adaptive, seed, cfg.learner, cfg.erm_slack)
    except (NPTransferError, ValueError) as exc:
        nan = math.nan
        status = f"error:{type(exc).__name__}:{exc}".replace("\n", " ")
        return TrialResult(cfg.scenario.name, n0, ns, nt, seed, 0, nan, nan, nan, nan, nan, nan, nan, status)


def _sort_key(r: TrialResult):
    return (r.scenario, r.n0, r.n_s, r.n_t, r.seed)


def run_sweep(cfg: SweepConfig, jobs: int = 1) -> list[TrialResult]:
    """Every (cell, seed) trial, sorted so output does not depend on scheduling."""
    tasks = [(cfg, cell, s) for cell in cfg.cells() for s in cfg.seeds()]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_one_trial, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        rows = [_one_trial(t) for t in tasks]
    return sorted(rows, key=_sort_key)


def mean_excess(results: Iterable[TrialResult], axis: str) -> dict[int, float]:
    """Mean exact target excess per value of ``axis`` over successful rows."""
    if axis not in ("n_s", "n_t", "n0"):
        raise ValueError("axis must be 'n_s', 'n_t' or 'n0'")
    groups: dict[int, list[float]] = {}
    for r in results:
        if r.status == "ok":
            groups.setdefault(getattr(r, axis), []).append(r.excess_target)
    return {n: float(np.mean(v)) for n, v in sorted(groups.items())}


def fit_rate(results: Sequence[TrialResult], axis: str) -> RateFit:
    """Least-squares slope of log mean excess against log n along ``axis``.

    The remaining sample-size axis (``n_t`` when fitting ``n_s`` and vice
    versa) must be constant across the rows.
    """
    if axis not in ("n_s", "n_t"):
        raise ValueError("axis must be 'n_s' or 'n_t'")
    other = "n_t" if axis == "n_s" else "n_s"
    if len({getattr(r, other) for r in results}) > 1:
        raise ConfigError(f"{other} varies across rows; fix it before fitting along {axis}")
    means = {n: m for n, m in mean_excess(results, axis).items() if m > 0 and n > 0}
    if len(means) < 4:
        raise InsufficientDataError(f"need at least 4 grid points with positive mean excess, got {len(means)}")
    ns = np.array(sorted(means), dtype=float)
    ys = np.log([means[int(n)] for n in ns])
    xs = np.log(ns)
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(slope), float(intercept), r2, tuple(int(n) for n in ns), tuple(means[int(n)] for n in ns))


# ----------------------------------------------------------------------- CSV


def _fmt(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def results_to_csv(results: Iterable[TrialResult]) -> str:
    buf = io.StringIO()
    # the default CRLF terminator makes the writer quote fields holding a bare CR
    w = csv.writer(buf)
    w.writerow(CSV_HEADER)
    for r in results:
        w.writerow([_fmt(getattr(r, k)) for k in CSV_HEADER])
    return buf.getvalue()


def write_csv(results: Iterable[TrialResult], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(results_to_csv(results))


_INT_FIELDS = {"n0", "n_s", "n_t", "seed", "chose_source"}
_STR_FIELDS = {"scenario", "status"}


def read_csv(source) -> list[TrialResult]:
    """Parse rows written by ``write_csv``; ``source`` is a path or an open text stream."""
    fh = open(source, newline="", encoding="utf-8") if not hasattr(source, "read") else source
    try:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ConfigError("unexpected CSV header")
        out = []
        for row in reader:
            vals = {}
            for k in CSV_HEADER:
                if k in _STR_FIELDS:
                    vals[k] = row[k]
                elif k in _INT_FIELDS:
                    vals[k] = int(row[k])
                else:
                    vals[k] = float(row[k])
            out.append(TrialResult(**vals))
        return out
    finally:
        if fh is not source:
            fh.close()
