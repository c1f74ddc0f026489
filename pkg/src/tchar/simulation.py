"""Monte Carlo check of the conditional regressions.

Samples of size ``n`` are sorted, the ``k``-th value is kept as the
conditioning statistic and a second statistic is computed from the rest of
the sample. Binning on the conditioning value gives empirical conditional
means to compare with the quadrature values from :mod:`tchar.order_stats`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .distributions import DistributionModel, sample
from .errors import DomainError, InsufficientDataError, MomentError
from .order_stats import OrderStatContext, Side, avg_cond_moment

__all__ = [
    "AboveAvgDeviation",
    "BelowAvgDeviation",
    "CompareResult",
    "RegressionEstimate",
    "SampleMean",
    "SquaredSpacingDifference",
    "StatisticKind",
    "WeightedTheorem1",
    "compare_report",
    "simulate_regression",
    "statistic_values",
    "theoretical_value",
]

MIN_BIN_COUNT = 10
CHUNK = 65536  # replications per RNG stream


# ---------------------------------------------------------------- statistic kinds


@dataclass(frozen=True)
class BelowAvgDeviation:
    """Mean of (X_{k:n} - X_{i:n})^r over i < k."""

    r: int = 1

    def __post_init__(self):
        if self.r not in (1, 2):
            raise DomainError(f"r must be 1 or 2, got {self.r}")


@dataclass(frozen=True)
class AboveAvgDeviation:
    """Mean of (X_{i:n} - X_{k:n})^r over i > k."""

    r: int = 1

    def __post_init__(self):
        if self.r not in (1, 2):
            raise DomainError(f"r must be 1 or 2, got {self.r}")


@dataclass(frozen=True)
class SampleMean:
    """Mean of the whole sample."""


@dataclass(frozen=True)
class WeightedTheorem1:
    """lam * (X_{k:n} - mean below) - (1 - lam) * (mean above - X_{k:n})."""

    lam: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise DomainError(f"lambda must lie in (0, 1), got {self.lam}")


@dataclass(frozen=True)
class SquaredSpacingDifference:
    """Mean of (a X_{k:n} - b X_{i:n})^2 below minus the same mean above,
    with a = (nu - 1)/2 and b = nu - 2. For nu = 3 these are squared spacings."""

    nu: float = 3.0

    def __post_init__(self):
        if not self.nu >= 3:
            raise DomainError(f"nu must be >= 3, got {self.nu}")


StatisticKind = BelowAvgDeviation | AboveAvgDeviation | SampleMean | WeightedTheorem1 | SquaredSpacingDifference


def _needs(kind) -> tuple[bool, bool]:
    """Whether ``kind`` uses ranks below and above k."""
    if isinstance(kind, BelowAvgDeviation):
        return True, False
    if isinstance(kind, AboveAvgDeviation):
        return False, True
    if isinstance(kind, SampleMean):
        return False, False
    return True, True


def statistic_values(kind: StatisticKind, ordered: np.ndarray, k: int) -> np.ndarray:
    """Statistic per row of an (replications, n) array of sorted samples."""
    m = ordered[:, k - 1]
    below = ordered[:, : k - 1]
    above = ordered[:, k:]
    if isinstance(kind, BelowAvgDeviation):
        return np.mean((m[:, None] - below) ** kind.r, axis=1)
    if isinstance(kind, AboveAvgDeviation):
        return np.mean((above - m[:, None]) ** kind.r, axis=1)
    if isinstance(kind, SampleMean):
        return np.mean(ordered, axis=1)
    if isinstance(kind, WeightedTheorem1):
        lam = kind.lam
        return lam * (m - below.mean(axis=1)) - (1.0 - lam) * (above.mean(axis=1) - m)
    if isinstance(kind, SquaredSpacingDifference):
        a = 0.5 * (kind.nu - 1.0)
        b = kind.nu - 2.0
        lo = np.mean((a * m[:, None] - b * below) ** 2, axis=1)
        hi = np.mean((a * m[:, None] - b * above) ** 2, axis=1)
        return lo - hi
    raise DomainError(f"unknown statistic kind {kind!r}")


def theoretical_value(dist: DistributionModel, n: int, k: int, kind: StatisticKind, x: float) -> float:
    """E[statistic | X_{k:n} = x] from the normalized truncated moments."""
    one = OrderStatContext(n, k, 1)

    def m(r: int, side: Side) -> float:
        return avg_cond_moment(dist, OrderStatContext(n, k, r), x, side)

    if isinstance(kind, BelowAvgDeviation):
        m1 = m(1, Side.BELOW)
        return x - m1 if kind.r == 1 else x * x - 2.0 * x * m1 + m(2, Side.BELOW)
    if isinstance(kind, AboveAvgDeviation):
        m1 = m(1, Side.ABOVE)
        return m1 - x if kind.r == 1 else m(2, Side.ABOVE) - 2.0 * x * m1 + x * x
    if isinstance(kind, SampleMean):
        total = x
        if k > 1:
            total += (k - 1) * avg_cond_moment(dist, one, x, Side.BELOW)
        if k < n:
            total += (n - k) * avg_cond_moment(dist, one, x, Side.ABOVE)
        return total / n
    if isinstance(kind, WeightedTheorem1):
        lam = kind.lam
        return lam * (x - m(1, Side.BELOW)) - (1.0 - lam) * (m(1, Side.ABOVE) - x)
    if isinstance(kind, SquaredSpacingDifference):
        a = 0.5 * (kind.nu - 1.0)
        b = kind.nu - 2.0
        lo = a * a * x * x - 2.0 * a * b * x * m(1, Side.BELOW) + b * b * m(2, Side.BELOW)
        hi = a * a * x * x - 2.0 * a * b * x * m(1, Side.ABOVE) + b * b * m(2, Side.ABOVE)
        return lo - hi
    raise DomainError(f"unknown statistic kind {kind!r}")


# ---------------------------------------------------------------- estimation


@dataclass
class RegressionEstimate:
    bin_edges: list[float]
    bin_centers: list[float]
    counts: list[int]
    empirical_mean: list[float]
    std_err: list[float]
    theoretical: list[float]
    z_scores: list[float]

    def to_dict(self) -> dict:
        return asdict(self)


def _check_kind(dist: DistributionModel, n: int, k: int, kind) -> None:
    use_below, use_above = _needs(kind)
    if use_below and k < 2:
        raise DomainError(f"{type(kind).__name__} needs k >= 2, got k={k}")
    if use_above and k > n - 1:
        raise DomainError(f"{type(kind).__name__} needs k <= n-1, got k={k}, n={n}")
    if isinstance(kind, SampleMean):
        use_below, use_above = k > 1, k < n
    r = 2 if isinstance(kind, SquaredSpacingDifference) else getattr(kind, "r", 1)
    for side, used in ((Side.BELOW, use_below), (Side.ABOVE, use_above)):
        if used and not dist.has_moment(r, side.value):
            raise MomentError(f"{dist.name} lacks the {side.value}-side moment of order {r}")


def _draw(dist: DistributionModel, n: int, replications: int, seed: int) -> np.ndarray:
    # fixed-size chunks on independent streams: the result does not depend on
    # how the chunks are scheduled
    parts = []
    for stream, start in enumerate(range(0, replications, CHUNK)):
        rows = min(CHUNK, replications - start)
        parts.append(sample(dist, rows * n, seed, stream).reshape(rows, n))
    out = np.concatenate(parts, axis=0)
    out.sort(axis=1)
    return out


def simulate_regression(
    dist: DistributionModel,
    n: int,
    k: int,
    kind: StatisticKind,
    replications: int,
    seed: int,
    bins: int = 50,
) -> RegressionEstimate:
    """Binned Monte Carlo estimate of E[statistic | X_{k:n}].

    Bins hold equal counts (edges at empirical quantiles of X_{k:n}); the
    theoretical value in each bin is evaluated at the bin's mean conditioning
    value, which is what ``bin_centers`` reports.
    """
    OrderStatContext(n, k)
    if bins < 1:
        raise DomainError(f"bins must be >= 1, got {bins}")
    if replications < MIN_BIN_COUNT * bins:
        raise DomainError(f"replications must be >= {MIN_BIN_COUNT} * bins = {MIN_BIN_COUNT * bins}")
    _check_kind(dist, n, k, kind)

    ordered = _draw(dist, n, replications, seed)
    cond = ordered[:, k - 1]
    stat = statistic_values(kind, ordered, k)

    edges = np.quantile(cond, np.linspace(0.0, 1.0, bins + 1))
    idx = np.clip(np.searchsorted(edges, cond, side="right") - 1, 0, bins - 1)
    counts = np.bincount(idx, minlength=bins)
    if counts.min() < MIN_BIN_COUNT:
        raise InsufficientDataError(f"bin {int(counts.argmin())} holds {int(counts.min())} points, need {MIN_BIN_COUNT}")

    centers, means, errs, theory, zs = [], [], [], [], []
    for b in range(bins):
        sel = idx == b
        xs = cond[sel]
        ys = stat[sel]
        center = float(np.mean(xs))
        mean = float(np.mean(ys))
        se = float(np.std(ys, ddof=1) / math.sqrt(ys.size))
        th = theoretical_value(dist, n, k, kind, center)
        if se > 0.0:
            z = (mean - th) / se
        else:
            z = 0.0 if mean == th else math.copysign(math.inf, mean - th)
        centers.append(center)
        means.append(mean)
        errs.append(se)
        theory.append(th)
        zs.append(z)
    return RegressionEstimate(
        bin_edges=[float(e) for e in edges],
        bin_centers=centers,
        counts=[int(c) for c in counts],
        empirical_mean=means,
        std_err=errs,
        theoretical=theory,
        z_scores=zs,
    )


@dataclass
class CompareResult:
    passed: bool
    pass_fraction: float
    checked_bins: list[int]
    failing_bins: list[int]
    summary: str = field(default="")


def compare_report(estimate: RegressionEstimate, z_threshold: float = 3.0,
                   min_pass_fraction: float = 0.95) -> CompareResult:
    """Pass when enough interior bins have |z| <= z_threshold.

    The lowest and highest bins are reported but not judged (unless there are
    fewer than three bins, in which case every bin is judged).
    """
    nb = len(estimate.z_scores)
    checked = list(range(1, nb - 1)) if nb >= 3 else list(range(nb))
    failing = [i for i in checked if not abs(estimate.z_scores[i]) <= z_threshold]
    frac = 1.0 - len(failing) / len(checked) if checked else 1.0
    passed = frac >= min_pass_fraction
    lines = [f"{len(checked) - len(failing)}/{len(checked)} interior bins within |z| <= {z_threshold:g} "
             f"({frac:.3f}, need {min_pass_fraction:g}): {'PASS' if passed else 'FAIL'}"]
    for i in failing:
        lines.append(f"  bin {i}: x={estimate.bin_centers[i]:.6g} empirical={estimate.empirical_mean[i]:.6g} "
                     f"theory={estimate.theoretical[i]:.6g} z={estimate.z_scores[i]:.3g}")
    return CompareResult(passed, frac, checked, failing, "\n".join(lines))
