"""Rate regions for the two-user Gaussian MAC with feedback.

The region is parameterized by an input correlation rho in [0, 1]:

    R1        <= C(P1 (1 - rho^2) / sz2)
    R2        <= C(P2 (1 - rho^2) / sz2)
    R1 + R2   <= C((P1 + P2 + 2 rho sqrt(P1 P2)) / sz2),      C(x) = log2(1+x)/2

and the full region is the union of these pentagons over rho.  The sum-rate
optimum rho* makes the product of the two individual SNR factors equal the
sum form; that consistency condition has a unique root in [0, 1].

Known interference at the transmitters does not enter any of these formulas:
nothing in this module takes a state variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameterError
from .riccati import steady_state_closed_form


def _c(snr: float) -> float:
    """Gaussian capacity log2(1 + snr) / 2 in bits per use."""
    return 0.5 * math.log2(1.0 + snr)


@dataclass(frozen=True)
class RatePair:
    r1: float
    r2: float

    def __post_init__(self):
        if self.r1 < 0 or self.r2 < 0:
            raise InvalidParameterError(f"rates must be >= 0, got {self}")

    @property
    def rsum(self) -> float:
        return self.r1 + self.r2


@dataclass(frozen=True)
class RegionBoundary:
    """Swept boundary: ordered (rho, r1_bound, r2_bound, rsum_bound) rows."""

    points: tuple

    def to_csv(self) -> str:
        lines = ["rho,r1,r2,rsum"]
        for rho, r1, r2, rsum in self.points:
            lines.append(f"{rho:.12g},{r1:.12g},{r2:.12g},{rsum:.12g}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class HybridPoint:
    """One power-split operating point; `splitter` is the user (1 or 2) that
    spends alpha of its power on interference-cancelling coding."""

    alpha: float
    splitter: int
    rho_star: float
    r1: float
    r2: float


def rates_to_gains(r1: float, r2: float) -> tuple[float, float]:
    """Scale factors (a1, a2) = (2^r1, -2^r2) for target rates in bits/use.

    Rates of 0 give |a_i| = 1, a boundary at which the error recursion does
    not contract.
    """
    if r1 < 0 or r2 < 0:
        raise InvalidParameterError(f"rates must be >= 0, got ({r1}, {r2})")
    return 2.0**r1, -(2.0**r2)


def solve_rho(p1_eff: float, p2_eff: float, sigma_eff2: float, tol: float = 1e-15) -> float:
    """Root rho* in [0, 1] of the product-equals-sum consistency condition

        (1 + x (1-rho^2)) (1 + y (1-rho^2)) = 1 + x + y + 2 rho sqrt(x y)

    with x = p1_eff/sigma_eff2, y = p2_eff/sigma_eff2.  g(0) = x y >= 0 and
    g(1) <= 0 bracket the root; g is strictly decreasing, so bisection finds
    the unique solution.  A zero power returns 0 (single-user case).
    """
    if p1_eff < 0 or p2_eff < 0:
        raise InvalidParameterError(
            f"powers must be >= 0, got ({p1_eff}, {p2_eff})"
        )
    if sigma_eff2 <= 0:
        raise InvalidParameterError(f"noise variance must be > 0, got {sigma_eff2}")
    if p1_eff == 0 or p2_eff == 0:
        return 0.0
    x = p1_eff / sigma_eff2
    y = p2_eff / sigma_eff2
    sxy = math.sqrt(x * y)

    def g(rho: float) -> float:
        u = 1.0 - rho * rho
        return (1.0 + x * u) * (1.0 + y * u) - (1.0 + x + y + 2.0 * rho * sxy)

    lo, hi = 0.0, 1.0
    if g(lo) <= 0.0:
        return 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def sum_capacity_point(p1: float, p2: float, sigma_z2: float):
    """Sum-capacity operating point: ((R1, R2), rho*).

    At rho* the identity R1 + R2 = C((P1 + P2 + 2 rho* sqrt(P1 P2))/sz2)
    holds, i.e. the individual and sum bounds are simultaneously tight.
    """
    rho = solve_rho(p1, p2, sigma_z2)
    u = 1.0 - rho * rho
    return RatePair(_c(p1 * u / sigma_z2), _c(p2 * u / sigma_z2)), rho


def hybrid_point(
    p1: float, p2: float, sigma_z2: float, alpha: float, splitter: int = 1
) -> HybridPoint:
    """Operating point where the splitting user spends alpha of its power on
    coding against the known interference and the rest on feedback coding.

    The non-split traffic sees effective noise sigma_z2 + alpha*P_split; the
    split user recovers C(alpha*P_split/sigma_z2) on top of its feedback rate.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParameterError(f"alpha must be in [0, 1], got {alpha}")
    if splitter not in (1, 2):
        raise InvalidParameterError(f"splitter must be 1 or 2, got {splitter}")
    abar = 1.0 - alpha
    if splitter == 1:
        sig_eff = sigma_z2 + alpha * p1
        rho = solve_rho(abar * p1, p2, sig_eff)
        r1 = _c((1.0 - abar * rho * rho) * p1 / sigma_z2)
        num = sigma_z2 + p1 + p2 + 2.0 * rho * math.sqrt(abar * p1 * p2)
        den = sigma_z2 + (1.0 - abar * rho * rho) * p1
        r2 = 0.5 * math.log2(num / den)
    else:
        sig_eff = sigma_z2 + alpha * p2
        rho = solve_rho(p1, abar * p2, sig_eff)
        r2 = _c((1.0 - abar * rho * rho) * p2 / sigma_z2)
        num = sigma_z2 + p1 + p2 + 2.0 * rho * math.sqrt(abar * p1 * p2)
        den = sigma_z2 + (1.0 - abar * rho * rho) * p2
        r1 = 0.5 * math.log2(num / den)
    return HybridPoint(alpha=alpha, splitter=splitter, rho_star=rho, r1=r1, r2=r2)


def hybrid_sweep(p1, p2, sigma_z2, alphas, splitter: int = 1) -> list[HybridPoint]:
    return [hybrid_point(p1, p2, sigma_z2, a, splitter) for a in alphas]


def region_sweep(p1: float, p2: float, sigma_z2: float, grid_size: int) -> RegionBoundary:
    """Pentagon bounds on a uniform rho grid over [0, 1]."""
    if grid_size < 2:
        raise InvalidParameterError(f"grid_size must be >= 2, got {grid_size}")
    if p1 < 0 or p2 < 0:
        raise InvalidParameterError(f"powers must be >= 0, got ({p1}, {p2})")
    if sigma_z2 <= 0:
        raise InvalidParameterError(f"noise variance must be > 0, got {sigma_z2}")
    pts = []
    cross = 2.0 * math.sqrt(p1 * p2)
    for i in range(grid_size):
        rho = i / (grid_size - 1)
        u = 1.0 - rho * rho
        pts.append(
            (
                rho,
                _c(p1 * u / sigma_z2),
                _c(p2 * u / sigma_z2),
                _c((p1 + p2 + rho * cross) / sigma_z2),
            )
        )
    return RegionBoundary(points=tuple(pts))


def point_in_region(
    rate_pair: RatePair, p1: float, p2: float, sigma_z2: float, slack: float = 0.0
) -> bool:
    """Whether some rho in [0, 1] satisfies all three pentagon inequalities.

    The individual bounds decrease in rho and the sum bound increases, so
    the feasible set is an interval: take the largest rho allowed by the
    individual bounds and check the sum bound there.  `slack` loosens every
    inequality by that many bits.
    """
    r1 = rate_pair.r1 - slack
    r2 = rate_pair.r2 - slack

    def rho_cap(r: float, p: float) -> float | None:
        """Largest rho with C(p(1-rho^2)/sz2) >= r, or None if infeasible."""
        if r <= 0:
            return 1.0
        if p <= 0:
            return None
        need = (4.0**r - 1.0) * sigma_z2 / p  # required 1 - rho^2
        if need > 1.0:
            return None
        return math.sqrt(1.0 - need)

    cap1 = rho_cap(r1, p1)
    cap2 = rho_cap(r2, p2)
    if cap1 is None or cap2 is None:
        return False
    rho = min(cap1, cap2)
    rsum_bound = _c((p1 + p2 + 2.0 * rho * math.sqrt(p1 * p2)) / sigma_z2)
    return rate_pair.r1 + rate_pair.r2 <= rsum_bound + slack
