"""Hard discrete instances for the minimax lower bound and checks of their premises.

Three constructions share one layout: an atom ``x0`` carrying most of the
``mu0`` mass and ``d/2`` pairs of atoms ``(x1_i, x2_i)`` on which the rare
laws tilt by ``+-eps/(2d)``. Instances are indexed by sign vectors taken from
a Gilbert-Varshamov packing, and ``verify_instance`` checks class membership,
the Delta bound, pairwise separation, the KL budget and the range of eps with
exact arithmetic on the construction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .distributions import DiscreteOnPoints, kl_divergence, make_rng
from .errors import ConfigError, PackingError
from .hypothesis import AllLabelings
from .scenario import TransferScenario

__all__ = [
    "PackingCode",
    "HardInstance",
    "InstanceFamily",
    "VerificationReport",
    "CheckResult",
    "gv_packing",
    "build_instance",
    "hard_family",
    "perturbation_size",
    "verify_instance",
    "bernoulli_kl",
    "bernoulli_kl_bound_check",
    "product_kl",
    "half_dimension",
    "C0",
    "VARIANTS",
]

C0 = 6.0
VARIANTS = ("C1", "C2", "C3")
GV_RETRIES = 1_000_000


# ------------------------------------------------------------------- packing


@dataclass(frozen=True)
class PackingCode:
    d: int
    codewords: np.ndarray  # (M, d) of +-1, first row all ones
    min_dist: int
    seed: int | None = None

    @property
    def M(self) -> int:
        return len(self.codewords)

    def distances(self) -> np.ndarray:
        c = self.codewords
        return (c[:, None, :] != c[None, :, :]).sum(axis=2)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "M": self.M,
            "min_dist": self.min_dist,
            "seed": self.seed,
            "codewords": self.codewords.astype(int).tolist(),
        }


def gv_packing(d: int, rng=None, min_dist: int | None = None, size: int | None = None) -> PackingCode:
    """Randomized greedy packing of {-1, +1}^d containing the all-ones word.

    Defaults: distance ``ceil(d/8)`` and ``2**floor(d/8) + 1`` words, one
    more than the guaranteed count so that ``M`` words remain besides the
    all-ones center.
    """
    if d < 1:
        raise ValueError("packing length must be positive")
    min_dist = math.ceil(d / 8) if min_dist is None else int(min_dist)
    size = 2 ** (d // 8) + 1 if size is None else int(size)
    seed = rng if isinstance(rng, int) else None
    if rng is None or isinstance(rng, int):
        rng = make_rng(rng)
    words = [np.ones(d, dtype=np.int8)]
    tries = 0
    while len(words) < size:
        tries += 1
        if tries > GV_RETRIES:
            raise PackingError(f"greedy packing stalled at {len(words)} of {size} words")
        w = rng.choice(np.array([-1, 1], dtype=np.int8), size=d)
        kept = np.array(words)
        if np.min((kept != w).sum(axis=1)) >= min_dist:
            words.append(w)
    return PackingCode(d, np.array(words), min_dist, seed)


# ----------------------------------------------------------------- instances


def half_dimension(variant: str, d_H: int) -> int:
    """Number of sign coordinates: ``d/2`` pairs for C1/C3, a single sign for C2."""
    if variant == "C2":
        return 1
    d = d_H - 1 if d_H % 2 == 1 else d_H - 2
    return d // 2


@dataclass(frozen=True)
class HardInstance:
    variant: str
    d_H: int
    alpha: float
    epsilon: float
    rho: float
    sigma: tuple[int, ...]
    mu0: DiscreteOnPoints
    mu1S: DiscreteOnPoints
    mu1T: DiscreteOnPoints

    @property
    def points(self) -> tuple[str, ...]:
        return self.mu0.points

    @property
    def d(self) -> int:
        return 2 * len(self.sigma) if self.variant != "C2" else 2

    def projected_class(self) -> AllLabelings:
        """Every labeling of the chosen atoms with ``x0`` labeled 0."""
        return AllLabelings(self.points, forced_zeros=frozenset({"x0"}))

    def optimal_labeling(self) -> frozenset:
        """Atoms accepted by the target-optimal classifier: the favored atom of each pair."""
        if self.variant == "C2":
            return frozenset({"x1" if self.sigma[0] == 1 else "x2"})
        return frozenset(f"x{1 if s == 1 else 2}_{i + 1}" for i, s in enumerate(self.sigma))

    def scenario(self, r: float = 0.0) -> TransferScenario:
        return TransferScenario(
            self.mu0, self.mu1S, self.mu1T, self.alpha, self.projected_class(), r, name=f"hard_{self.variant}"
        )


def build_instance(
    variant: str, d_H: int, alpha: float, epsilon: float, rho: float, sigma: Sequence[int]
) -> HardInstance:
    if variant not in VARIANTS:
        raise ConfigError(f"variant must be one of {VARIANTS}")
    if not 0 < alpha < 0.5:
        raise ConfigError("alpha must lie in (0, 1/2)")
    if not 0 < epsilon <= 1:
        raise ConfigError("epsilon must lie in (0, 1]")
    if rho < 1:
        raise ConfigError("rho must be at least 1")
    sigma = tuple(int(s) for s in sigma)
    if any(s not in (-1, 1) for s in sigma):
        raise ConfigError("sigma entries must be +-1")
    tilt_s = epsilon**rho

    if variant == "C2":
        if d_H < 3:
            raise ConfigError("C2 needs d_H >= 3")
        if len(sigma) != 1:
            raise ConfigError("C2 is indexed by a single sign k")
        k = sigma[0]
        pts = ("x0", "x1", "x2")
        mu0 = DiscreteOnPoints(pts, (1 - 2 * alpha, alpha, alpha))
        mu1T = DiscreteOnPoints(pts, (0.0, 0.5 + k * epsilon / 2, 0.5 - k * epsilon / 2))
        mu1S = DiscreteOnPoints(pts, (0.0, 0.5 + k * tilt_s / 2, 0.5 - k * tilt_s / 2))
        return HardInstance(variant, d_H, alpha, epsilon, rho, sigma, mu0, mu1S, mu1T)

    if d_H < 3:
        raise ConfigError(f"{variant} needs d_H >= 3")
    half = half_dimension(variant, d_H)
    if len(sigma) != half:
        raise ConfigError(f"sigma must have length {half} for d_H={d_H}")
    d = 2 * half
    pts = ("x0",) + tuple(f"x1_{i + 1}" for i in range(half)) + tuple(f"x2_{i + 1}" for i in range(half))
    src_sign = sigma if variant == "C1" else (1,) * half

    def rare(signs, tilt):
        up = [1 / d + s / 2 * tilt / d for s in signs]
        down = [1 / d - s / 2 * tilt / d for s in signs]
        return DiscreteOnPoints(pts, (0.0, *up, *down))

    mu0 = DiscreteOnPoints(pts, (1 - 2 * alpha,) + (2 * alpha / d,) * d)
    return HardInstance(variant, d_H, alpha, epsilon, rho, sigma, mu0, rare(src_sign, tilt_s), rare(sigma, epsilon))


def perturbation_size(variant: str, d_H: int, rho: float, n_S: int, n_T: int, c1: float, delta: float = 0.0) -> float:
    """The perturbation size tied to the sample sizes for each construction."""
    src = math.inf if n_S == 0 else (d_H / n_S) ** (1 / (2 * rho))
    tgt = math.inf if n_T == 0 else (d_H / n_T) ** 0.5
    if variant == "C1":
        return c1 * min(src, tgt)
    if variant == "C2":
        src = math.inf if n_S == 0 else (1 / n_S) ** (1 / (2 * rho))
        tgt = math.inf if n_T == 0 else (1 / n_T) ** 0.5
        return c1 * min(src, tgt)
    if variant == "C3":
        return c1 * min(delta, tgt)
    raise ConfigError(f"variant must be one of {VARIANTS}")


@dataclass(frozen=True)
class InstanceFamily:
    """Shared parameters plus the packing whose words index the instances."""

    variant: str
    d_H: int
    alpha: float
    rho: float
    code: PackingCode
    delta: float = 0.0

    def instances(self, epsilon: float) -> list[HardInstance]:
        return [
            build_instance(self.variant, self.d_H, self.alpha, epsilon, self.rho, w) for w in self.code.codewords
        ]


def hard_family(variant: str, d_H: int, alpha: float, rho: float, seed: int = 0, delta: float = 0.0) -> InstanceFamily:
    """Family over a packing of the sign coordinates with distance ``ceil(d/8)``.

    C2 uses the two-point code ``{+1, -1}``.
    """
    if variant == "C2":
        code = PackingCode(1, np.array([[1], [-1]], dtype=np.int8), 1, seed)
    else:
        half = half_dimension(variant, d_H)
        d = 2 * half
        if d < 8:
            raise ConfigError("C1/C3 families need d >= 8, i.e. d_H >= 9")
        code = gv_packing(half, seed, min_dist=math.ceil(d / 8), size=2 ** (d // 8) + 1)
    if variant == "C3" and not delta > 0:
        raise ConfigError("C3 needs a positive Delta")
    return InstanceFamily(variant, d_H, alpha, rho, code, delta)


# ------------------------------------------------------------------------ KL


def bernoulli_kl(p: float, q: float) -> float:
    terms = []
    for a, b in ((p, q), (1 - p, 1 - q)):
        if a > 0:
            if b == 0:
                return math.inf
            terms.append(a * math.log(a / b))
    return max(0.0, math.fsum(terms))


def bernoulli_kl_bound_check(a: float, b: float, c0: float = C0) -> tuple[float, float, bool]:
    """Exact KL(Ber(1/2+a) || Ber(1/2+b)) against ``c0 * (a - b)**2``."""
    if abs(a) > 0.25 or abs(b) > 0.25:
        raise ValueError("perturbations must satisfy |a|, |b| <= 1/4")
    exact = bernoulli_kl(0.5 + a, 0.5 + b)
    bound = c0 * (a - b) ** 2
    return exact, bound, exact <= bound + 1e-15


def product_kl(n_S: int, kl_S: float, n_T: int, kl_T: float) -> float:
    """KL between product laws of ``n_S`` source and ``n_T`` target draws."""
    return n_S * kl_S + n_T * kl_T


# -------------------------------------------------------------- verification


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    bound: float
    witness: str = ""

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "value": _json_num(self.value),
            "bound": _json_num(self.bound),
            "witness": self.witness,
        }


def _json_num(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


@dataclass
class VerificationReport:
    variant: str
    d_H: int
    d: int
    alpha: float
    rho: float
    n_S: int
    n_T: int
    c1: float
    epsilon: float
    delta: float
    M: int
    seed: int | None
    r: float
    checks: dict = field(default_factory=dict)
    pairs: list = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failed(self) -> list[str]:
        return [k for k, c in self.checks.items() if not c.passed]

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "d_H": self.d_H,
            "d": self.d,
            "alpha": self.alpha,
            "rho": self.rho,
            "n_S": self.n_S,
            "n_T": self.n_T,
            "c1": self.c1,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "M": self.M,
            "seed": self.seed,
            "r": self.r,
            "c0": C0,
            "all_pass": self.all_pass,
            "checks": {k: c.to_dict() for k, c in self.checks.items()},
        }

    CSV_HEADER = ("i", "j", "hamming", "separation", "kl_source", "kl_target", "kl_total")

    def csv_rows(self) -> list[tuple]:
        return [tuple(row) for row in self.pairs]


def _type_enumeration(groups: list[int]) -> np.ndarray:
    """All count vectors (none, first, second, both) per group, concatenated."""
    per = []
    for m in groups:
        rows = [
            (z, a, b, m - z - a - b)
            for z in range(m + 1)
            for a in range(m + 1 - z)
            for b in range(m + 1 - z - a)
        ]
        per.append(np.array(rows, dtype=np.int64).reshape(-1, 4))
    if not per:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*[np.arange(len(p)) for p in per], indexing="ij")
    return np.concatenate([p[g.ravel()] for p, g in zip(per, grids)], axis=1)


def _class_exponent_check(inst: HardInstance, r: float) -> tuple[float, int]:
    """Least coefficient at exponent ``rho`` over every feasible labeling of ``inst``.

    Labelings are grouped by what they do on each pair of atoms; within a
    group of pairs sharing (target sign, source sign) the risks depend only on
    how many pairs take each of the four local labels, so the enumeration is
    exact. Returns the coefficient and the number of label-type combinations.
    """
    if inst.variant == "C2":
        cls = inst.projected_class()
        sc = inst.scenario(r)
        cands = cls.candidates()
        t1 = cands.masses(sc.mu0)
        ok = t1 <= sc.alpha + r + 1e-12
        s2 = 1 - cands.masses(sc.mu1S)
        t2 = 1 - cands.masses(sc.mu1T)
        return _coef(t1, s2, t2, ok, inst.alpha, inst.rho), int(ok.sum())

    d = inst.d
    half = d // 2
    p0 = inst.mu0.as_dict()
    pS = inst.mu1S.as_dict()
    pT = inst.mu1T.as_dict()
    # group coordinates by (mass of x1 under target, mass of x1 under source)
    keys = []
    for i in range(1, half + 1):
        keys.append((pT[f"x1_{i}"], pT[f"x2_{i}"], pS[f"x1_{i}"], pS[f"x2_{i}"], p0[f"x1_{i}"], p0[f"x2_{i}"]))
    groups: dict[tuple, int] = {}
    for k in keys:
        groups[k] = groups.get(k, 0) + 1
    gkeys = list(groups)
    counts = _type_enumeration([groups[k] for k in gkeys])
    t1 = np.zeros(len(counts))
    acc_s = np.zeros(len(counts))
    acc_t = np.zeros(len(counts))
    for g, (t_x1, t_x2, s_x1, s_x2, m_x1, m_x2) in enumerate(gkeys):
        z, a, b, e = (counts[:, 4 * g + j] for j in range(4))
        t1 += a * m_x1 + b * m_x2 + e * (m_x1 + m_x2)
        acc_s += a * s_x1 + b * s_x2 + e * (s_x1 + s_x2)
        acc_t += a * t_x1 + b * t_x2 + e * (t_x1 + t_x2)
    ok = t1 <= inst.alpha + r + 1e-12
    return _coef(t1, 1 - acc_s, 1 - acc_t, ok, inst.alpha, inst.rho), len(counts)


def _coef(t1, s2, t2, ok, alpha, rho) -> float:
    sol = t1 <= alpha + 1e-12
    best = s2[sol].min()
    src_sols = np.flatnonzero(sol & (s2 <= best + 1e-12))
    worst = src_sols[np.argmax(t2[src_sols])]
    s = np.maximum(0.0, s2[ok] - s2[worst])
    tau = np.maximum(0.0, t2[ok] - t2[worst])
    live = tau > 1e-15
    if not live.any():
        return 0.0
    if np.any(s[live] <= 0):
        return math.inf
    return float(np.max(tau[live] ** rho / s[live]))


def verify_instance(family: InstanceFamily, n_S: int, n_T: int, c1: float, r: float | None = None) -> VerificationReport:
    """Check the five premises of the lower-bound argument on ``family``.

    ``r`` is the Type-I slack of the class check; it defaults to half of
    ``2 alpha / d_H``.
    """
    if not c1 > 0:
        raise ConfigError("c1 must be positive")
    eps = perturbation_size(family.variant, family.d_H, family.rho, n_S, n_T, c1, family.delta)
    r = family.alpha / family.d_H if r is None else float(r)
    code = family.code
    rep = VerificationReport(
        family.variant,
        family.d_H,
        2 * code.d if family.variant != "C2" else 2,
        family.alpha,
        family.rho,
        n_S,
        n_T,
        c1,
        eps,
        family.delta,
        code.M,
        code.seed,
        r,
    )

    # (e) range of eps and the premise on the rate
    src = math.inf if n_S == 0 else (family.d_H / n_S) ** (1 / (2 * family.rho))
    tgt = math.inf if n_T == 0 else (family.d_H / n_T) ** 0.5
    premise = min(family.delta + src, tgt)
    eps_ok = 0 < eps <= 1 and math.isclose(eps, perturbation_size(family.variant, family.d_H, family.rho, n_S, n_T, c1, family.delta))
    rep.checks["e_epsilon_range"] = CheckResult(
        "e_epsilon_range", eps_ok and premise <= 2, premise, 2.0, "" if eps_ok else f"epsilon={eps:.6g} outside (0, 1]"
    )
    if not 0 < eps <= 1:
        for name in ("a_transfer_exponent", "b_delta_bound", "c_separation", "d_kl_budget"):
            rep.checks[name] = CheckResult(name, False, math.nan, math.nan, "epsilon outside (0, 1]")
        return rep

    insts = family.instances(eps)

    # (a) exponent at most rho with coefficient at most 1
    worst_c, worst_i = 0.0, 0
    for i, inst in enumerate(insts):
        c, _ = _class_exponent_check(inst, r)
        if c > worst_c:
            worst_c, worst_i = c, i
    rep.checks["a_transfer_exponent"] = CheckResult(
        "a_transfer_exponent", worst_c <= 1 + 1e-9, worst_c, 1.0, f"sigma index {worst_i}"
    )

    # (b) target excess of the worst source solution is at most Delta
    worst_delta, worst_j = 0.0, 0
    for j, inst in enumerate(insts):
        dlt = _delta_exact(inst)
        if dlt > worst_delta:
            worst_delta, worst_j = dlt, j
    rep.checks["b_delta_bound"] = CheckResult(
        "b_delta_bound", worst_delta <= family.delta + 1e-12, worst_delta, family.delta, f"sigma index {worst_j}"
    )

    # (c) separation of target risks and (d) KL budget, over all ordered pairs
    m_tsy = max(code.M - 1, 1)
    budget = math.log(m_tsy) / 8 if family.variant != "C2" else 0.5
    dist = code.distances()
    min_sep, sep_w = math.inf, ""
    max_kl, kl_w = 0.0, ""
    for i, j in itertools.permutations(range(len(insts)), 2):
        a, b = insts[i], insts[j]
        h_b = b.optimal_labeling()
        risk_own = 1 - math.fsum(a.mu1T.mass_of(p) for p in a.optimal_labeling())
        risk_other = 1 - math.fsum(a.mu1T.mass_of(p) for p in h_b)
        sep = risk_other - risk_own
        kl_s = kl_divergence(a.mu1S, b.mu1S)
        kl_t = kl_divergence(a.mu1T, b.mu1T)
        total = product_kl(n_S, kl_s, n_T, kl_t)
        rep.pairs.append((i, j, int(dist[i, j]), sep, kl_s, kl_t, total))
        if sep < min_sep:
            min_sep, sep_w = sep, f"pair ({i}, {j})"
        if total > max_kl:
            max_kl, kl_w = total, f"pair ({i}, {j})"
    need = eps / 8 if family.variant != "C2" else eps
    rep.checks["c_separation"] = CheckResult(
        "c_separation", min_sep >= need - 1e-12, min_sep, need, sep_w
    )
    rep.checks["d_kl_budget"] = CheckResult("d_kl_budget", max_kl <= budget, max_kl, budget, kl_w)
    rep.checks = dict(sorted(rep.checks.items()))
    return rep


def _delta_exact(inst: HardInstance) -> float:
    """Target excess of the source-optimal labeling (unique: it takes the source-favored atoms)."""
    if inst.variant == "C2":
        fav = "x1" if inst.mu1S.mass_of("x1") >= inst.mu1S.mass_of("x2") else "x2"
        src = {fav}
    else:
        half = len(inst.sigma)
        src = {
            f"x1_{i}" if inst.mu1S.mass_of(f"x1_{i}") >= inst.mu1S.mass_of(f"x2_{i}") else f"x2_{i}"
            for i in range(1, half + 1)
        }
    best = math.fsum(inst.mu1T.mass_of(p) for p in inst.optimal_labeling())
    got = math.fsum(inst.mu1T.mass_of(p) for p in src)
    return max(0.0, best - got)
