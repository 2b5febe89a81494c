"""Steady-state covariance and receiver gains for the two-user feedback recursion.

The transmit vector X = [X1, X2]^T evolves as X(k+1) = A X(k) - L Y'(k) with
A = diag(a1, a2), Y' = H X + Z, H = [1 1].  Its covariance Q = E[X X^T] obeys

    Q(k+1) = A [Q(k) - Q(k) H^T (H Q(k) H^T + sigma_z2)^(-1) H Q(k)] A,

which for |a1| > 1 and |a2| > 1 converges to a unique fixed point.  The fixed
point's diagonal entries are the per-user transmit powers and its normalized
off-diagonal entry is the input correlation; in closed form

    P_i   = (a_i^2 - 1) (|a1 a2| + 1)^2 / (|a1| + |a2|)^2 * sigma_z2,
    |rho| = sqrt((a1^2 - 1)(a2^2 - 1)) / (|a1 a2| + 1).

The per-step estimator gains are l = Q H^T / (H Q H^T + sigma_z2); the
recursion gain is L = [a1 l1, a2 l2]^T.  All functions here are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InvalidParameterError


@dataclass(frozen=True)
class Covariance2:
    """Symmetric 2x2 covariance with entries (q11, q22, q12)."""

    q11: float
    q22: float
    q12: float

    def __post_init__(self):
        if self.q11 < 0 or self.q22 < 0:
            raise InvalidParameterError(
                f"diagonal entries must be nonnegative, got ({self.q11}, {self.q22})"
            )
        bound = self.q11 * self.q22
        if self.q12 * self.q12 > bound * (1.0 + 1e-9) + 1e-300:
            raise InvalidParameterError(
                f"q12^2 = {self.q12**2} exceeds q11*q22 = {bound}"
            )

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.q11, self.q12], [self.q12, self.q22]])

    @property
    def rho(self) -> float:
        """Signed correlation coefficient; 0 for a degenerate diagonal."""
        denom = math.sqrt(self.q11 * self.q22)
        return self.q12 / denom if denom > 0 else 0.0

    def max_abs_diff(self, other: "Covariance2") -> float:
        return max(
            abs(self.q11 - other.q11),
            abs(self.q22 - other.q22),
            abs(self.q12 - other.q12),
        )


def riccati_step(q: Covariance2, a1: float, a2: float, sigma_z2: float) -> Covariance2:
    """One iterate of the covariance recursion."""
    if sigma_z2 <= 0:
        raise InvalidParameterError(f"sigma_z2 must be > 0, got {sigma_z2}")
    # Q H^T = [q11 + q12, q12 + q22], H Q H^T = q11 + 2 q12 + q22.
    u1 = q.q11 + q.q12
    u2 = q.q12 + q.q22
    beta = q.q11 + 2.0 * q.q12 + q.q22 + sigma_z2
    q11 = a1 * a1 * (q.q11 - u1 * u1 / beta)
    q22 = a2 * a2 * (q.q22 - u2 * u2 / beta)
    q12 = a1 * a2 * (q.q12 - u1 * u2 / beta)
    # The update is a Schur complement, so tiny negative diagonals are
    # floating-point noise; clip them before revalidation.
    return Covariance2(max(q11, 0.0), max(q22, 0.0), q12)


def riccati_fixed_point(
    a1: float,
    a2: float,
    sigma_z2: float,
    tol: float = 1e-12,
    max_iter: int = 100_000,
) -> Covariance2:
    """Iterate the recursion from diag(sigma_z2, sigma_z2) to its fixed point.

    Returns a Q whose max-entry residual under one more step is below `tol`.
    Raises ConvergenceError (carrying the last residual) on failure.
    """
    if abs(a1) <= 1 or abs(a2) <= 1:
        raise InvalidParameterError(
            f"|a1| and |a2| must exceed 1 for convergence, got ({a1}, {a2})"
        )
    if sigma_z2 <= 0:
        raise InvalidParameterError(f"sigma_z2 must be > 0, got {sigma_z2}")
    if tol <= 0:
        raise InvalidParameterError(f"tol must be > 0, got {tol}")
    q = Covariance2(sigma_z2, sigma_z2, 0.0)
    residual = math.inf
    for _ in range(max_iter):
        nxt = riccati_step(q, a1, a2, sigma_z2)
        residual = nxt.max_abs_diff(q)
        q = nxt
        if residual < tol:
            return q
    raise ConvergenceError(
        f"no fixed point within {max_iter} iterations (residual {residual:.3e})",
        residual=residual,
    )


def steady_state_closed_form(a1: float, a2: float, sigma_z2: float):
    """Closed-form steady-state powers and |correlation|: (p1, p2, rho_abs)."""
    if abs(a1) <= 1 or abs(a2) <= 1:
        raise InvalidParameterError(
            f"|a1| and |a2| must exceed 1, got ({a1}, {a2})"
        )
    if sigma_z2 <= 0:
        raise InvalidParameterError(f"sigma_z2 must be > 0, got {sigma_z2}")
    scale = (abs(a1 * a2) + 1.0) ** 2 / (abs(a1) + abs(a2)) ** 2 * sigma_z2
    p1 = (a1 * a1 - 1.0) * scale
    p2 = (a2 * a2 - 1.0) * scale
    rho_abs = math.sqrt((a1 * a1 - 1.0) * (a2 * a2 - 1.0)) / (abs(a1 * a2) + 1.0)
    return p1, p2, rho_abs


def optimal_gain(q: Covariance2, sigma_z2: float) -> np.ndarray:
    """Mean-square-optimal estimator gain l = Q H^T / (H Q H^T + sigma_z2)."""
    if sigma_z2 <= 0:
        raise InvalidParameterError(f"sigma_z2 must be > 0, got {sigma_z2}")
    beta = q.q11 + 2.0 * q.q12 + q.q22 + sigma_z2
    return np.array([(q.q11 + q.q12) / beta, (q.q12 + q.q22) / beta])


def riccati_trajectory(
    a1: float, a2: float, sigma_z2: float, steps: int, q0: Covariance2 | None = None
) -> list[Covariance2]:
    """Covariance iterates Q(0..steps) for diagnostics; Q(0) defaults to
    diag(sigma_z2, sigma_z2)."""
    q = q0 if q0 is not None else Covariance2(sigma_z2, sigma_z2, 0.0)
    out = [q]
    for _ in range(steps):
        q = riccati_step(q, a1, a2, sigma_z2)
        out.append(q)
    return out


@dataclass(frozen=True)
class GainSet:
    """Scheme constants: scale factors a_i, estimator gains l_i, recursion
    gain L = (a1 l1, a2 l2), steady-state covariance and its correlation.

    `rho` is the signed fixed-point correlation; rate formulas use |rho|.
    """

    a1: float
    a2: float
    l1: float
    l2: float
    big_l: tuple[float, float]
    q_ss: Covariance2
    rho: float
    sigma_z2: float

    def __post_init__(self):
        if abs(self.rho) > 1.0 + 1e-12:
            raise InvalidParameterError(f"|rho| must be <= 1, got {self.rho}")
        expect = (self.a1 * self.l1, self.a2 * self.l2)
        if not (
            math.isclose(self.big_l[0], expect[0], rel_tol=1e-9, abs_tol=1e-12)
            and math.isclose(self.big_l[1], expect[1], rel_tol=1e-9, abs_tol=1e-12)
        ):
            raise InvalidParameterError(
                f"big_l {self.big_l} inconsistent with a_i * l_i {expect}"
            )

    @property
    def rho_abs(self) -> float:
        return abs(self.rho)


def gain_set(
    a1: float,
    a2: float,
    sigma_z2: float,
    tol: float = 1e-12,
    max_iter: int = 100_000,
) -> GainSet:
    """GainSet at the steady state for scale factors (a1, a2).

    The rate convention a_i = (-1)^(i-1) 2^(r_i) gives a1 > 1 and a2 < -1;
    any |a_i| > 1 is accepted.
    """
    q = riccati_fixed_point(a1, a2, sigma_z2, tol=tol, max_iter=max_iter)
    l1, l2 = optimal_gain(q, sigma_z2)
    return GainSet(
        a1=a1,
        a2=a2,
        l1=float(l1),
        l2=float(l2),
        big_l=(a1 * float(l1), a2 * float(l2)),
        q_ss=q,
        rho=q.rho,
        sigma_z2=sigma_z2,
    )
