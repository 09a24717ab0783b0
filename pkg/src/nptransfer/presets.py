"""Named scenarios used by the CLI, the tests and the acceptance suite."""

from __future__ import annotations

import math
from typing import Any, Callable, Mapping

from .distributions import DiscreteOnPoints, Gaussian, Mixture, PowerLaw, Triangular, Uniform
from .errors import ConfigError
from .hypothesis import AllLabelings, IntervalUnionPair, ThresholdOnSegment
from .lowerbound import build_instance, half_dimension
from .regions import IntervalUnion
from .scenario import TransferScenario

__all__ = ["PRESETS", "preset", "scenario_from_config"]


def power_source(rho: float = 1.0, r: float = 0.0) -> TransferScenario:
    """N(-1, 1) against a power-law source and a uniform target, threshold class on [-1, 1]."""
    mu0 = Gaussian(-1.0, 1.0)
    alpha = mu0.measure(IntervalUnion.of((0.0, 1.0)))
    return TransferScenario(
        mu0, PowerLaw(rho), Uniform(0.0, 1.0), alpha, ThresholdOnSegment(-1.0, 1.0), r, f"power_source_rho{rho:g}"
    )


def gaussian_shift(alpha: float = 0.05, source_mean: float = 2.0, target_mean: float = 3.0) -> TransferScenario:
    """Equal-variance Gaussians; the density ratio is monotone so level sets are half-lines."""
    return TransferScenario(
        Gaussian(0.0, 1.0),
        Gaussian(source_mean, 1.0),
        Gaussian(target_mean, 1.0),
        alpha,
        ThresholdOnSegment(-10.0, math.inf),
        name="gaussian_shift",
    )


def gaussian_narrow(alpha: float = 0.05, target_sd: float = 0.5) -> TransferScenario:
    """Source N(2, 1), target N(2, target_sd^2): the target level set is a bounded interval."""
    return TransferScenario(
        Gaussian(0.0, 1.0),
        Gaussian(2.0, 1.0),
        Gaussian(2.0, target_sd**2),
        alpha,
        ThresholdOnSegment(-10.0, math.inf),
        name="gaussian_narrow",
    )


def triangular_uniform(alpha: float = 1 / 32) -> TransferScenario:
    """Triangular mu0 on [-2, 2], source U[1, 2], target U[4/3, 8/3]."""
    return TransferScenario(
        Triangular(),
        Uniform(1.0, 2.0),
        Uniform(4 / 3, 8 / 3),
        alpha,
        ThresholdOnSegment(-3.0, math.inf),
        name="triangular_uniform",
    )


def discrete_support_gap() -> TransferScenario:
    """Five atoms; the target puts mass on an atom where mu0 and the source both vanish."""
    pts = ("a", "b", "c", "e", "d")
    return TransferScenario(
        DiscreteOnPoints(pts, (0.4, 0.2, 0.2, 0.2, 0.0)),
        DiscreteOnPoints(pts, (0.05, 0.1, 0.6, 0.25, 0.0)),
        DiscreteOnPoints(pts, (0.05, 0.05, 0.4, 0.1, 0.4)),
        0.2,
        AllLabelings(pts),
        name="discrete_support_gap",
    )


def union_pair(r: float | None = None, t0: float = 0.75, t1: float = 0.2, A1: float = 0.5) -> TransferScenario:
    """Two-interval class where classifiers far outside the slack break the transfer condition.

    ``A2`` is fixed by normalization. ``r`` defaults to half of the largest
    slack that keeps ``b >= 2 t0 - 1``.
    """
    A2 = (1 - A1 * (2 * t0 - t1 - 1)) / (2 - 2 * t0)
    if not A2 > A1 > 0 or not 2 * t0 - 1 > t1:
        raise ConfigError("need A2 > A1 > 0 and 2 t0 - 1 > t1")
    mid = 2 * t0 - 1
    w1 = A1 * (mid - t1)
    mu1T = Mixture(((w1, Uniform(t1, mid)), (1 - w1, Uniform(mid, 1.0))))
    mu0 = Gaussian(0.0, 1.0)
    alpha = mu0.measure(IntervalUnion.of((t0, 1.0)))
    r_max = mu0.measure(IntervalUnion.of((mid, t0))) - alpha
    r = 0.5 * r_max if r is None else float(r)
    return TransferScenario(mu0, Uniform(0.0, 1.0), mu1T, alpha, IntervalUnionPair(t0, t1), r, "union_pair")


def hard_instance(
    variant: str = "C1",
    d_H: int = 17,
    alpha: float = 0.25,
    epsilon: float = 0.5,
    rho: float = 1.0,
    sigma: list[int] | None = None,
) -> TransferScenario:
    half = half_dimension(variant, d_H)
    sigma = [1] * half if sigma is None else sigma
    return build_instance(variant, d_H, alpha, epsilon, rho, sigma).scenario()


def shifted_source(d_H: int = 17, alpha: float = 0.25, delta: float = 0.3, rho: float = 1.0) -> TransferScenario:
    """C3 instance whose source favors every wrong atom: target excess of the source solution is ``delta``."""
    half = half_dimension("C3", d_H)
    sc = build_instance("C3", d_H, alpha, 2 * delta, rho, [-1] * half).scenario()
    return TransferScenario(sc.mu0, sc.mu1S, sc.mu1T, sc.alpha, sc.cls, sc.r, "shifted_source")


PRESETS: dict[str, Callable[..., TransferScenario]] = {
    "power_source": power_source,
    "gaussian_shift": gaussian_shift,
    "gaussian_narrow": gaussian_narrow,
    "triangular_uniform": triangular_uniform,
    "discrete_support_gap": discrete_support_gap,
    "union_pair": union_pair,
    "hard_instance": hard_instance,
    "shifted_source": shifted_source,
}


def preset(name: str, **params: Any) -> TransferScenario:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    try:
        return PRESETS[name](**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for preset {name!r}: {exc}") from exc


def scenario_from_config(d: Mapping[str, Any]) -> TransferScenario:
    """Either ``{"preset": name, "params": {...}}`` or a full scenario description."""
    if "preset" in d:
        return preset(d["preset"], **dict(d.get("params", {})))
    return TransferScenario.from_dict(d)
