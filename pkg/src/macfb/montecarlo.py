"""Seeded Monte Carlo harness over the feedback codec.

Per-trial state, noise and message streams are counter-based functions of
(seed, trial, role), so any trial can be reproduced in isolation and batches
give bit-identical results regardless of chunking.  The batch simulator
mirrors the scalar codec operation for operation, which keeps the two paths
numerically interchangeable.  Scalar reductions over trials use math.fsum
(exact), so aggregate statistics do not depend on trial order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .codec import TAIL_START, GaussianMacConfig, calibration_scales, run_block
from .errors import InvalidParameterError
from .regions import rates_to_gains
from .riccati import GainSet, gain_set

_Z95 = 1.959963984540054

STATE_KINDS = ("gaussian", "uniform", "zero")

# Per-trial reduction inputs are kept in memory up to this many trials so the
# final sums can be done exactly (order-independent); larger runs fall back
# to deterministic chunked partial sums.
_EXACT_REDUCE_LIMIT = 1 << 22

_CHUNK_ELEMS = 4_000_000


@dataclass(frozen=True)
class SimConfig:
    """A seeded batch of independent block simulations."""

    config: GaussianMacConfig
    trials: int
    seed: int
    state_kind: str = "gaussian"
    calibrated_init: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidParameterError(f"trials must be >= 1, got {self.trials}")
        if self.state_kind not in STATE_KINDS:
            raise InvalidParameterError(
                f"state_kind must be one of {STATE_KINDS}, got {self.state_kind!r}"
            )


@dataclass(frozen=True)
class TrialStats:
    """Aggregated outcome of a run_trials batch."""

    err_count_1: int
    err_count_2: int
    err_rate_1: float
    err_rate_2: float
    ci_halfwidth_1: float
    ci_halfwidth_2: float
    avg_power_1: float
    avg_power_2: float
    rho_hat: float
    eps_var_1: float
    eps_var_2: float
    trials: int
    seed: int

    def to_json_dict(self) -> dict:
        """Fixed-order dict matching the serialization schema."""
        return {
            "err1": self.err_rate_1,
            "err2": self.err_rate_2,
            "ci1": self.ci_halfwidth_1,
            "ci2": self.ci_halfwidth_2,
            "avg_power_1": self.avg_power_1,
            "avg_power_2": self.avg_power_2,
            "rho_hat": self.rho_hat,
            "eps_var_1": self.eps_var_1,
            "eps_var_2": self.eps_var_2,
            "trials": self.trials,
            "seed": self.seed,
        }


def gains_for_config(config: GaussianMacConfig, tol: float = 1e-12) -> GainSet:
    """Steady-state gains for the config's rates: a_i = (-1)^(i-1) 2^(r_i)."""
    a1, a2 = rates_to_gains(config.r1, config.r2)
    return gain_set(a1, a2, config.sigma_z2, tol=tol)


def wilson_halfwidth(successes: int, trials: int, z: float = _Z95) -> float:
    """Half-width of the Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    p = successes / trials
    denom = 1.0 + z * z / trials
    half = (z / denom) * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials))
    return half


def _state_matrix(sim: SimConfig, role: int, trial_idx, n: int) -> np.ndarray:
    sig2 = sim.config.sigma_s2
    if sim.state_kind == "zero" or sig2 == 0.0:
        count = len(trial_idx) if not np.isscalar(trial_idx) else trial_idx
        return np.zeros((count, n))
    if sim.state_kind == "uniform":
        half = math.sqrt(3.0 * sig2)
        u = rng.uniforms(sim.seed, role, trial_idx, n)
        return (2.0 * u - 1.0) * half
    return rng.normals(sim.seed, role, trial_idx, n) * math.sqrt(sig2)


def _noise_matrix(sim: SimConfig, trial_idx, n: int) -> np.ndarray:
    sig2 = sim.config.sigma_z2
    if sig2 == 0.0:
        count = len(trial_idx) if not np.isscalar(trial_idx) else trial_idx
        return np.zeros((count, n))
    return rng.normals(sim.seed, rng.ROLE_NOISE, trial_idx, n) * math.sqrt(sig2)


def trial_streams(sim: SimConfig, trial: int, state_role: int = rng.ROLE_STATE):
    """(state_seq, noise_seq, m1, m2) for one trial, reproducible in isolation."""
    idx = np.array([trial], dtype=np.uint64)
    n = sim.config.n
    state = _state_matrix(sim, state_role, idx, n)[0]
    noise = _noise_matrix(sim, idx, n)[0]
    m1 = int(rng.message_indices(sim.seed, rng.ROLE_MESSAGE, idx, 0, sim.config.m1)[0])
    m2 = int(rng.message_indices(sim.seed, rng.ROLE_MESSAGE, idx, 1, sim.config.m2)[0])
    return state, noise, m1, m2


def run_single_trial(sim: SimConfig, gains: GainSet, trial: int):
    """Scalar-path BlockResult for one trial of the batch."""
    state, noise, m1, m2 = trial_streams(sim, trial)
    return run_block(
        sim.config, gains, m1, m2, state, noise, calibrated_init=sim.calibrated_init
    )


def _simulate_batch(config: GaussianMacConfig, gains: GainSet, m1, m2, S, Z, calibrated):
    """Vectorized block simulation over the leading (trials) axis.

    Mirrors run_block operation for operation so each row equals the scalar
    path bit for bit.  Returns per-trial final errors, decode errors, block
    power sums and steady-state window sums.
    """
    n = config.n
    trials = S.shape[0]
    big_m1, big_m2 = config.m1, config.m2
    a1, a2, l1, l2 = gains.a1, gains.a2, gains.l1, gains.l2
    g1, g2 = calibration_scales(gains, calibrated)
    silent_1 = big_m1 == 1
    silent_2 = big_m2 == 1

    theta0_1 = (2 * m1 + 1) / float(2 * big_m1) if not silent_1 else np.full(trials, 0.5)
    theta0_2 = (2 * m2 + 1) / float(2 * big_m2) if not silent_2 else np.full(trials, 0.5)
    if np.isscalar(theta0_1):
        theta0_1 = np.asarray(theta0_1)
    if np.isscalar(theta0_2):
        theta0_2 = np.asarray(theta0_2)

    # a_i^-(j-2) for j = 2..n, same multiplicative construction as the codec
    inv_pows_1 = np.empty(n + 1)
    inv_pows_2 = np.empty(n + 1)
    ip1 = ip2 = 1.0
    for j in range(2, n + 1):
        inv_pows_1[j] = ip1
        inv_pows_2[j] = ip2
        ip1 /= a1
        ip2 /= a2

    # precancel entry points theta_i(2), accumulated backwards like the codec
    theta2_1 = theta0_1.astype(float).copy()
    theta2_2 = theta0_2.astype(float).copy()
    for j in range(n, 2, -1):
        theta2_1 = theta2_1 + (l1 * S[:, j - 1]) * inv_pows_1[j]
        theta2_2 = theta2_2 + (l2 * S[:, j - 1]) * inv_pows_2[j]

    p_sum_1 = np.zeros(trials)
    p_sum_2 = np.zeros(trials)
    tail_p1 = np.zeros(trials)
    tail_p2 = np.zeros(trials)
    tail_cross = np.zeros(trials)
    tail_slots = 0

    zero = np.zeros(trials)

    # slot 1
    x1 = zero if silent_1 else g1 * theta2_1 - S[:, 0]
    x2 = zero
    y = x1 + x2 + S[:, 0] + Z[:, 0]
    hat1 = y / g1
    eps1 = y / g1 - theta2_1
    p_sum_1 += x1 * x1
    p_sum_2 += x2 * x2

    # slot 2
    x1 = zero
    x2 = zero if silent_2 else g2 * theta2_2 - S[:, 1]
    y = x1 + x2 + S[:, 1] + Z[:, 1]
    hat2 = y / g2
    eps2 = y / g2 - theta2_2
    p_sum_1 += x1 * x1
    p_sum_2 += x2 * x2

    # recursion k = 3..n
    x1 = zero if silent_1 else a1 * eps1
    x2 = zero if silent_2 else a2 * eps2
    inv1 = 1.0 / a1
    inv2 = 1.0 / a2
    for k in range(3, n + 1):
        y = x1 + x2 + S[:, k - 1] + Z[:, k - 1]
        hat1 = hat1 - l1 * y * inv1
        hat2 = hat2 - l2 * y * inv2
        inv1 /= a1
        inv2 /= a2
        p_sum_1 += x1 * x1
        p_sum_2 += x2 * x2
        if k >= TAIL_START:
            tail_p1 += x1 * x1
            tail_p2 += x2 * x2
            tail_cross += x1 * x2
            tail_slots += 1
        if k < n:
            y_inner = y - S[:, k - 1]
            if not silent_1:
                x1 = a1 * x1 - a1 * l1 * y_inner
            if not silent_2:
                x2 = a2 * x2 - a2 * l2 * y_inner

    final_err_1 = np.zeros(trials) if silent_1 else hat1 - theta0_1
    final_err_2 = np.zeros(trials) if silent_2 else hat2 - theta0_2
    if silent_1:
        err1 = np.zeros(trials, dtype=bool)
    else:
        dec1 = np.clip(np.rint(hat1 * big_m1 - 0.5), 0, big_m1 - 1)
        err1 = dec1 != np.asarray(m1, dtype=float)
    if silent_2:
        err2 = np.zeros(trials, dtype=bool)
    else:
        dec2 = np.clip(np.rint(hat2 * big_m2 - 0.5), 0, big_m2 - 1)
        err2 = dec2 != np.asarray(m2, dtype=float)

    return {
        "final_err_1": final_err_1,
        "final_err_2": final_err_2,
        "err1": err1,
        "err2": err2,
        "power_sum_1": p_sum_1,
        "power_sum_2": p_sum_2,
        "tail_power_1": tail_p1,
        "tail_power_2": tail_p2,
        "tail_cross": tail_cross,
        "tail_slots": tail_slots,
    }


def _run_batches(sim: SimConfig, gains: GainSet, state_role: int = rng.ROLE_STATE):
    """Yield per-chunk _simulate_batch outputs over all trials."""
    n = sim.config.n
    chunk = max(1, min(sim.trials, _CHUNK_ELEMS // max(n, 1)))
    for start in range(0, sim.trials, chunk):
        idx = np.arange(start, min(start + chunk, sim.trials), dtype=np.uint64)
        S = _state_matrix(sim, state_role, idx, n)
        Z = _noise_matrix(sim, idx, n)
        m1 = rng.message_indices(sim.seed, rng.ROLE_MESSAGE, idx, 0, sim.config.m1)
        m2 = rng.message_indices(sim.seed, rng.ROLE_MESSAGE, idx, 1, sim.config.m2)
        yield _simulate_batch(sim.config, gains, m1, m2, S, Z, sim.calibrated_init)


def aggregate_trials(batches, sim: SimConfig) -> TrialStats:
    """Reduce per-trial outputs to TrialStats.

    Up to _EXACT_REDUCE_LIMIT trials every scalar sum is a math.fsum over the
    individual per-trial values, so the result is independent of trial order.
    """
    n = sim.config.n
    err1 = err2 = 0
    tail_slots = 0
    fe1_parts, fe2_parts = [], []
    tp1_parts, tp2_parts, tc_parts = [], [], []
    exact = sim.trials <= _EXACT_REDUCE_LIMIT
    # chunked fallback accumulators
    s_tp1 = s_tp2 = s_tc = 0.0
    s_fe1 = s_fe2 = s_fe1sq = s_fe2sq = 0.0

    for out in batches:
        err1 += int(np.count_nonzero(out["err1"]))
        err2 += int(np.count_nonzero(out["err2"]))
        tail_slots = out["tail_slots"]
        if exact:
            fe1_parts.append(out["final_err_1"])
            fe2_parts.append(out["final_err_2"])
            tp1_parts.append(out["tail_power_1"])
            tp2_parts.append(out["tail_power_2"])
            tc_parts.append(out["tail_cross"])
        else:
            s_tp1 += math.fsum(out["tail_power_1"])
            s_tp2 += math.fsum(out["tail_power_2"])
            s_tc += math.fsum(out["tail_cross"])
            s_fe1 += math.fsum(out["final_err_1"])
            s_fe2 += math.fsum(out["final_err_2"])
            s_fe1sq += math.fsum(out["final_err_1"] ** 2)
            s_fe2sq += math.fsum(out["final_err_2"] ** 2)

    t = sim.trials
    if exact:
        fe1 = np.concatenate(fe1_parts)
        fe2 = np.concatenate(fe2_parts)
        mean1 = math.fsum(fe1) / t
        mean2 = math.fsum(fe2) / t
        var1 = math.fsum((fe1 - mean1) ** 2) / (t - 1) if t > 1 else 0.0
        var2 = math.fsum((fe2 - mean2) ** 2) / (t - 1) if t > 1 else 0.0
        sum_tp1 = math.fsum(np.concatenate(tp1_parts))
        sum_tp2 = math.fsum(np.concatenate(tp2_parts))
        sum_tc = math.fsum(np.concatenate(tc_parts))
    else:
        mean1 = s_fe1 / t
        mean2 = s_fe2 / t
        var1 = (s_fe1sq - t * mean1 * mean1) / (t - 1) if t > 1 else 0.0
        var2 = (s_fe2sq - t * mean2 * mean2) / (t - 1) if t > 1 else 0.0
        sum_tp1, sum_tp2, sum_tc = s_tp1, s_tp2, s_tc

    tail_total = tail_slots * t
    if tail_total > 0:
        avg_p1 = sum_tp1 / tail_total
        avg_p2 = sum_tp2 / tail_total
    else:
        avg_p1 = avg_p2 = 0.0
    denom = math.sqrt(sum_tp1 * sum_tp2)
    rho_hat = sum_tc / denom if denom > 0 else 0.0

    return TrialStats(
        err_count_1=err1,
        err_count_2=err2,
        err_rate_1=err1 / t,
        err_rate_2=err2 / t,
        ci_halfwidth_1=wilson_halfwidth(err1, t),
        ci_halfwidth_2=wilson_halfwidth(err2, t),
        avg_power_1=avg_p1,
        avg_power_2=avg_p2,
        rho_hat=rho_hat,
        eps_var_1=var1,
        eps_var_2=var2,
        trials=t,
        seed=sim.seed,
    )


def run_trials(sim: SimConfig, gains: GainSet) -> TrialStats:
    """Run the whole batch; deterministic given (sim, gains).

    Messages are drawn uniformly per user; state and noise streams come from
    per-trial counter substreams.  Average powers and the input correlation
    are measured over slots k >= 10 (needs n >= 10).
    """
    return aggregate_trials(_run_batches(sim, gains), sim)


def state_invariance_check(sim: SimConfig, gains: GainSet) -> float:
    """Max |delta final error| over paired blocks that share noise and
    messages but draw independent state sequences."""
    if sim.state_kind == "zero":
        raise InvalidParameterError("state_kind must not be 'zero' for this check")
    worst = 0.0
    outs_a = _run_batches(sim, gains, state_role=rng.ROLE_STATE)
    outs_b = _run_batches(sim, gains, state_role=rng.ROLE_STATE_ALT)
    for a, b in zip(outs_a, outs_b):
        d1 = np.max(np.abs(a["final_err_1"] - b["final_err_1"]))
        d2 = np.max(np.abs(a["final_err_2"] - b["final_err_2"]))
        worst = max(worst, float(d1), float(d2))
    return worst


@dataclass(frozen=True)
class DecayRow:
    """Measured vs predicted final-error variance at one block length."""

    n: int
    eps_var_1: float
    eps_var_pred_1: float
    eps_var_2: float
    eps_var_pred_2: float
    pe_1: float
    pe_2: float


def decay_predictions(gains: GainSet, n: int) -> tuple[float, float]:
    """Var(err_i(n)) = Q_ii / a_i^(2(n-1)) from the steady-state covariance."""
    v1 = gains.q_ss.q11 * abs(gains.a1) ** (-2 * (n - 1))
    v2 = gains.q_ss.q22 * abs(gains.a2) ** (-2 * (n - 1))
    return v1, v2


def decay_probe(sim: SimConfig, gains: GainSet, n_list) -> list[DecayRow]:
    """Measure the final-error variance decay across block lengths.

    With calibrated initialization the measurements track the predictions;
    without it the rows are still produced for diagnostic comparison.
    """
    rows = []
    for n in n_list:
        cfg = GaussianMacConfig(
            p1=sim.config.p1,
            p2=sim.config.p2,
            sigma_s2=sim.config.sigma_s2,
            sigma_z2=sim.config.sigma_z2,
            n=int(n),
            r1=sim.config.r1,
            r2=sim.config.r2,
        )
        sub = SimConfig(
            config=cfg,
            trials=sim.trials,
            seed=sim.seed,
            state_kind=sim.state_kind,
            calibrated_init=sim.calibrated_init,
        )
        stats = run_trials(sub, gains)
        pred1, pred2 = decay_predictions(gains, int(n))
        rows.append(
            DecayRow(
                n=int(n),
                eps_var_1=stats.eps_var_1,
                eps_var_pred_1=pred1,
                eps_var_2=stats.eps_var_2,
                eps_var_pred_2=pred2,
                pe_1=stats.err_rate_1,
                pe_2=stats.err_rate_2,
            )
        )
    return rows
