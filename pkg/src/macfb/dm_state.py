"""Finite-alphabet MAC with state: joint construction, information bounds,
and numerical maximization over policy families.

A channel is a transition table W[s][x1][x2][y] plus a state pmf.  An inner
policy factorizes as P(u|s) P(v1,x1|u,s) P(v2,x2|u,s); it induces the rate
pentagon

    R1      <= I(X1; Y | X2, U, S)
    R2      <= I(X2; Y | X1, U, S)
    R1+R2   <= I(V1,V2; Y) - I(V1,V2; S)

where the sum expression can be negative off-optimum (kept unclamped, with a
clamped view for region work).  An outer policy is an unconstrained
P(v1,v2,x1,x2|s) with bounds I(Vi;Y|Vj) - I(Vi;S|Vj) and the same sum form.

Maximization is multistart coordinate ascent: each conditional slice is
improved by pairwise probability-mass moves on a grid that refines from 1/4
down to 1/64.  The result is a certified lower bound on the true region
(for the outer family, a lower estimate of the supremum, and labeled so).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, TableValidationError

_ATOL = 1e-12
_LOG2 = math.log(2.0)

INNER_AXES = ("s", "u", "v1", "v2", "x1", "x2", "y")
OUTER_AXES = ("s", "v1", "v2", "x1", "x2", "y")


def _check_conditional(table: np.ndarray, cond_axes: int, name: str):
    """Validate that the trailing axes of `table` sum to 1 for every setting
    of the leading `cond_axes` axes; errors name the offending slice."""
    if np.any(table < -_ATOL):
        idx = np.unravel_index(int(np.argmin(table)), table.shape)
        raise TableValidationError(f"{name}{list(idx)} is negative: {table[idx]}")
    sums = table.reshape(table.shape[:cond_axes] + (-1,)).sum(axis=-1)
    bad = np.abs(sums - 1.0) > 1e-12 * max(1.0, table.size)
    if np.any(bad):
        idx = np.unravel_index(int(np.argmax(np.abs(sums - 1.0))), sums.shape)
        raise TableValidationError(
            f"{name}{list(idx)} sums to {sums[idx]!r}, expected 1"
        )


@dataclass(frozen=True)
class FiniteChannel:
    """Finite MAC with state: W[s, x1, x2, y] and state pmf p_s."""

    w: np.ndarray
    p_s: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        p_s = np.asarray(self.p_s, dtype=float)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "p_s", p_s)
        if w.ndim != 4:
            raise TableValidationError(f"w must have 4 axes [s][x1][x2][y], got {w.ndim}")
        if p_s.ndim != 1 or p_s.shape[0] != w.shape[0]:
            raise TableValidationError(
                f"p_s has shape {p_s.shape}, expected ({w.shape[0]},)"
            )
        _check_conditional(w, 3, "w")
        if np.any(p_s < -_ATOL):
            raise TableValidationError(f"p_s has a negative entry: {p_s.min()}")
        if abs(p_s.sum() - 1.0) > 1e-12:
            raise TableValidationError(f"p_s sums to {p_s.sum()!r}, expected 1")

    @property
    def n_s(self) -> int:
        return self.w.shape[0]

    @property
    def n_x1(self) -> int:
        return self.w.shape[1]

    @property
    def n_x2(self) -> int:
        return self.w.shape[2]

    @property
    def n_y(self) -> int:
        return self.w.shape[3]


def builtin_channel(kind: str, q: float) -> FiniteChannel:
    """Built-in binary-input channels with Bernoulli(q) state.

    adder:   Y = (X1 + X2 + S) mod 2
    erasure: Y = (X1 + X2 + S) mod 3
    """
    if not 0.0 <= q <= 1.0:
        raise InvalidParameterError(f"state bias q must be in [0, 1], got {q}")
    if kind == "adder":
        n_y, mod = 2, 2
    elif kind == "erasure":
        n_y, mod = 3, 3
    else:
        raise InvalidParameterError(f"unknown channel kind {kind!r}")
    w = np.zeros((2, 2, 2, n_y))
    for s in range(2):
        for x1 in range(2):
            for x2 in range(2):
                w[s, x1, x2, (x1 + x2 + s) % mod] = 1.0
    return FiniteChannel(w=w, p_s=np.array([1.0 - q, q]))


def load_channel(source) -> FiniteChannel:
    """Load a channel from a JSON file path, file object, or parsed dict.

    Schema: {"x1": n1, "x2": n2, "s": ns, "y": ny,
             "w": [s][x1][x2][y] nested lists, "p_s": [ns]}.
    """
    if isinstance(source, dict):
        doc = source
    elif hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source) as fh:
            doc = json.load(fh)
    for key in ("x1", "x2", "s", "y", "w", "p_s"):
        if key not in doc:
            raise TableValidationError(f"channel JSON missing key {key!r}")
    w = np.asarray(doc["w"], dtype=float)
    expect = (doc["s"], doc["x1"], doc["x2"], doc["y"])
    if w.shape != expect:
        raise TableValidationError(f"w has shape {w.shape}, expected {expect}")
    p_s = np.asarray(doc["p_s"], dtype=float)
    return FiniteChannel(w=w, p_s=p_s)


def channel_to_dict(channel: FiniteChannel) -> dict:
    return {
        "x1": channel.n_x1,
        "x2": channel.n_x2,
        "s": channel.n_s,
        "y": channel.n_y,
        "w": channel.w.tolist(),
        "p_s": channel.p_s.tolist(),
    }


@dataclass(frozen=True)
class InnerPolicy:
    """Tables P(u|s) [s,u], P(v1,x1|u,s) [u,s,v1,x1], P(v2,x2|u,s) [u,s,v2,x2]."""

    p_u: np.ndarray
    p1: np.ndarray
    p2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p_u", np.asarray(self.p_u, dtype=float))
        object.__setattr__(self, "p1", np.asarray(self.p1, dtype=float))
        object.__setattr__(self, "p2", np.asarray(self.p2, dtype=float))
        _check_conditional(self.p_u, 1, "p_u")
        _check_conditional(self.p1.reshape(self.p1.shape[:2] + (-1,)), 2, "p1")
        _check_conditional(self.p2.reshape(self.p2.shape[:2] + (-1,)), 2, "p2")

    @property
    def cards(self):
        return self.p_u.shape[1], self.p1.shape[2], self.p2.shape[2]


@dataclass(frozen=True)
class OuterPolicy:
    """Table P(v1,v2,x1,x2|s) with shape [s, v1, v2, x1, x2]."""

    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "table", np.asarray(self.table, dtype=float))
        _check_conditional(self.table.reshape(self.table.shape[:1] + (-1,)), 1, "table")


@dataclass(frozen=True)
class Joint:
    """A joint pmf with named axes."""

    axes: tuple
    p: np.ndarray

    def axis(self, name: str) -> int:
        return self.axes.index(name)


def build_joint(channel: FiniteChannel, policy) -> Joint:
    """Joint distribution induced by a policy on the channel.

    Inner policies produce axes (s,u,v1,v2,x1,x2,y); outer policies
    (s,v1,v2,x1,x2,y).  The joint sums to 1 and marginalizes back to p_s.
    """
    if isinstance(policy, InnerPolicy):
        _check_inner_compat(channel, policy)
        return _inner_joint(channel, policy.p_u, policy.p1, policy.p2)
    if isinstance(policy, OuterPolicy):
        _check_outer_compat(channel, policy)
        return _outer_joint(channel, policy.table)
    raise InvalidParameterError(f"unsupported policy type {type(policy)!r}")


def _check_inner_compat(channel: FiniteChannel, policy: "InnerPolicy"):
    ns, n1, n2 = channel.n_s, channel.n_x1, channel.n_x2
    if policy.p_u.shape[0] != ns:
        raise TableValidationError(
            f"p_u has {policy.p_u.shape[0]} state rows, channel has {ns}"
        )
    if policy.p1.shape[1] != ns or policy.p1.shape[3] != n1:
        raise TableValidationError(f"p1 shape {policy.p1.shape} mismatches channel")
    if policy.p2.shape[1] != ns or policy.p2.shape[3] != n2:
        raise TableValidationError(f"p2 shape {policy.p2.shape} mismatches channel")


def _check_outer_compat(channel: FiniteChannel, policy: "OuterPolicy"):
    t = policy.table
    if t.shape[0] != channel.n_s or t.shape[3] != channel.n_x1 or t.shape[4] != channel.n_x2:
        raise TableValidationError(f"table shape {t.shape} mismatches channel")


def _inner_joint(channel: FiniteChannel, p_u, p1, p2) -> Joint:
    p = np.einsum(
        "s,su,usva,uswb,saby->suvwaby", channel.p_s, p_u, p1, p2, channel.w
    )
    return Joint(axes=INNER_AXES, p=p)


def _outer_joint(channel: FiniteChannel, table) -> Joint:
    p = np.einsum("s,svwab,saby->svwaby", channel.p_s, table, channel.w)
    return Joint(axes=OUTER_AXES, p=p)


def _entropy(p: np.ndarray) -> float:
    """Shannon entropy in bits with 0*log(0) = 0."""
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum() / _LOG2)


def _marginal(joint: Joint, names) -> np.ndarray:
    keep = tuple(joint.axis(n) for n in names)
    drop = tuple(i for i in range(joint.p.ndim) if i not in keep)
    m = joint.p.sum(axis=drop)
    # reorder axes to the requested order
    order = sorted(range(len(keep)), key=lambda i: keep[i])
    inv = [order.index(i) for i in range(len(keep))]
    return np.transpose(m, inv) if len(keep) > 1 else m


def mutual_information(joint: Joint, set_a, set_b, set_c=()) -> float:
    """I(A; B | C) in bits over the named axis groups; groups must be disjoint.

    Computed as H(A,C) + H(B,C) - H(A,B,C) - H(C); values in [-1e-12, 0)
    from rounding are clamped to 0.
    """
    a, b, c = tuple(set_a), tuple(set_b), tuple(set_c)
    combined = a + b + c
    if len(set(combined)) != len(combined):
        raise InvalidParameterError(
            f"variable groups must be disjoint, got {a}, {b}, {c}"
        )
    for name in combined:
        if name not in joint.axes:
            raise InvalidParameterError(f"unknown axis {name!r}; have {joint.axes}")
    h_ac = _entropy(_marginal(joint, a + c))
    h_bc = _entropy(_marginal(joint, b + c))
    h_abc = _entropy(_marginal(joint, a + b + c))
    h_c = _entropy(_marginal(joint, c)) if c else 0.0
    val = h_ac + h_bc - h_abc - h_c
    return 0.0 if -1e-9 < val < 0.0 else val


@dataclass(frozen=True)
class RateTriple:
    """Bound values (r1_max, r2_max, rsum_max); rsum_max may be negative."""

    r1_max: float
    r2_max: float
    rsum_max: float

    def clamped(self) -> tuple:
        return (max(self.r1_max, 0.0), max(self.r2_max, 0.0), max(self.rsum_max, 0.0))

    def key(self) -> tuple:
        c = self.clamped()
        return (c[2], c[0], c[1])


def _inner_triple_from_joint(joint: Joint) -> RateTriple:
    r1 = mutual_information(joint, ("x1",), ("y",), ("x2", "u", "s"))
    r2 = mutual_information(joint, ("x2",), ("y",), ("x1", "u", "s"))
    rsum = mutual_information(joint, ("v1", "v2"), ("y",)) - mutual_information(
        joint, ("v1", "v2"), ("s",)
    )
    return RateTriple(r1, r2, rsum)


def _outer_triple_from_joint(joint: Joint) -> RateTriple:
    r1 = mutual_information(joint, ("v1",), ("y",), ("v2",)) - mutual_information(
        joint, ("v1",), ("s",), ("v2",)
    )
    r2 = mutual_information(joint, ("v2",), ("y",), ("v1",)) - mutual_information(
        joint, ("v2",), ("s",), ("v1",)
    )
    rsum = mutual_information(joint, ("v1", "v2"), ("y",)) - mutual_information(
        joint, ("v1", "v2"), ("s",)
    )
    return RateTriple(r1, r2, rsum)


def _h(p: np.ndarray) -> float:
    """Entropy in bits of a (possibly unnormalized-by-rounding) pmf array."""
    f = p.reshape(-1)
    return -float(f @ np.log(f + 1e-300)) / _LOG2


def _fast_inner_triple(channel: FiniteChannel, p_u, p1, p2) -> RateTriple:
    """Inner bounds without materializing the seven-axis joint.

    The individual bounds only need the joint over (S,U,X1,X2,Y); the sum
    bound only needs (S,V1,V2,Y).  Both are small direct contractions.
    """
    w = channel.w
    p_s = channel.p_s
    px1 = p1.sum(axis=2)  # (u,s,x1)
    px2 = p2.sum(axis=2)  # (u,s,x2)
    # B[s,u,a,b,y] over (S,U,X1,X2,Y)
    b = (
        p_s[:, None, None, None, None]
        * p_u[:, :, None, None, None]
        * px1.transpose(1, 0, 2)[:, :, :, None, None]
        * px2.transpose(1, 0, 2)[:, :, None, :, None]
        * w[:, None, :, :, :]
    )
    b_nxy = b.sum(axis=4)  # (s,u,a,b)
    h_suxx = _h(b_nxy)
    h_full = _h(b)
    h_sux2y = _h(b.sum(axis=2))
    h_sux1y = _h(b.sum(axis=3))
    h_sux2 = _h(b_nxy.sum(axis=2))
    h_sux1 = _h(b_nxy.sum(axis=3))
    r1 = h_suxx + h_sux2y - h_full - h_sux2
    r2 = h_suxx + h_sux1y - h_full - h_sux1
    # C[s,v,w,y] over (S,V1,V2,Y)
    d = np.einsum("usva,saby->usvby", p1, w)
    c = np.einsum("su,usvby,uswb->svwy", p_u, d, p2)
    c *= p_s[:, None, None, None]
    h_s = _h(p_s)
    h_y = _h(c.sum(axis=(0, 1, 2)))
    h_vvy = _h(c.sum(axis=0))
    h_vvs = _h(c.sum(axis=3))
    rsum = (h_y - h_vvy) - (h_s - h_vvs)
    r1 = 0.0 if -1e-9 < r1 < 0.0 else r1
    r2 = 0.0 if -1e-9 < r2 < 0.0 else r2
    return RateTriple(r1, r2, rsum)


def _fast_outer_triple(channel: FiniteChannel, table) -> RateTriple:
    """Outer bounds from the (S,V1,V2,Y) contraction of the policy table."""
    ns, nv1, nv2, n1, n2 = table.shape
    ny = channel.n_y
    wt = channel.w.reshape(ns, n1 * n2, ny)
    t = np.matmul(table.reshape(ns, nv1 * nv2, n1 * n2), wt).reshape(ns, nv1, nv2, ny)
    t *= channel.p_s[:, None, None, None]
    ts = t.sum(axis=3)  # (s,v1,v2)
    a = t.sum(axis=0)  # (v1,v2,y)
    v12 = ts.sum(axis=0)
    h_a = _h(a)
    h_ts = _h(ts)
    h_v12 = _h(v12)
    h_v1y = _h(a.sum(axis=1))
    h_v2y = _h(a.sum(axis=0))
    h_v1s = _h(ts.sum(axis=2))
    h_v2s = _h(ts.sum(axis=1))
    h_v1 = _h(v12.sum(axis=1))
    h_v2 = _h(v12.sum(axis=0))
    h_y = _h(a.sum(axis=(0, 1)))
    h_s = _h(channel.p_s)
    r1 = (h_v12 + h_v2y - h_a - h_v2) - (h_v12 + h_v2s - h_ts - h_v2)
    r2 = (h_v12 + h_v1y - h_a - h_v1) - (h_v12 + h_v1s - h_ts - h_v1)
    rsum = (h_v12 + h_y - h_a) - (h_v12 + h_s - h_ts)
    return RateTriple(r1, r2, rsum)


def inner_rate_triple(channel: FiniteChannel, policy: InnerPolicy) -> RateTriple:
    _check_inner_compat(channel, policy)
    return _fast_inner_triple(channel, policy.p_u, policy.p1, policy.p2)


def inner_diagnostics(channel: FiniteChannel, policy: InnerPolicy) -> dict:
    """Decomposition diagnostics: the common-information rate I(U;Y) and the
    conditional sum expression I(V1,V2;Y|U) - I(V1,V2;S)."""
    joint = build_joint(channel, policy)
    i_u_y = mutual_information(joint, ("u",), ("y",))
    i_v_y_u = mutual_information(joint, ("v1", "v2"), ("y",), ("u",))
    i_v_s = mutual_information(joint, ("v1", "v2"), ("s",))
    return {
        "i_u_y": i_u_y,
        "i_v12_y_given_u_minus_i_v12_s": i_v_y_u - i_v_s,
    }


def outer_rate_triple(channel: FiniteChannel, policy: OuterPolicy) -> RateTriple:
    _check_outer_compat(channel, policy)
    return _fast_outer_triple(channel, policy.table)


def class_gamma_check(channel: FiniteChannel):
    """Structural determinism test: for every (s, other input, y) at most one
    value of the checked input is channel-compatible.

    Returns (True, None) if either input passes, else (False, witness) where
    the witness maps each input name to a violating tuple
    (s, other_input, y, first_candidate, second_candidate).
    """
    w = channel.w

    def side_witness(axis: int):
        # axis 1 checks x1 (other = x2), axis 2 checks x2 (other = x1)
        for s in range(channel.n_s):
            other_n = channel.n_x2 if axis == 1 else channel.n_x1
            self_n = channel.n_x1 if axis == 1 else channel.n_x2
            for other in range(other_n):
                for y in range(channel.n_y):
                    cands = []
                    for own in range(self_n):
                        x1, x2 = (own, other) if axis == 1 else (other, own)
                        if w[s, x1, x2, y] > 0:
                            cands.append(own)
                    if len(cands) > 1:
                        return (s, other, y, cands[0], cands[1])
        return None

    w1 = side_witness(1)
    if w1 is None:
        return True, None
    w2 = side_witness(2)
    if w2 is None:
        return True, None
    return False, {"x1": w1, "x2": w2}


# ---------------------------------------------------------------------------
# policy search
# ---------------------------------------------------------------------------


def default_cards(channel: FiniteChannel):
    """Support-lemma style defaults: |U| = |S|+1, |Vi| = |Xi||S|+1."""
    return (
        channel.n_s + 1,
        channel.n_x1 * channel.n_s + 1,
        channel.n_x2 * channel.n_s + 1,
    )


@dataclass(frozen=True)
class PolicyEntry:
    policy_id: int
    triple: RateTriple
    policy: object


@dataclass(frozen=True)
class DmRegion:
    """Union of rate pentagons found by a search, with achieving policies."""

    entries: tuple
    kind: str  # "inner" (achievable) or "outer" (lower estimate of the bound)

    def best(self) -> PolicyEntry:
        return max(self.entries, key=lambda e: (e.triple.key(), -e.policy_id))

    def best_sum(self) -> float:
        return self.best().triple.clamped()[2]

    def contains(self, r1: float, r2: float, slack: float = 0.0) -> bool:
        for e in self.entries:
            a, b, c = e.triple.clamped()
            if r1 <= a + slack and r2 <= b + slack and r1 + r2 <= c + slack:
                return True
        return False

    def corner_points(self) -> list:
        """Dominant pentagon corners over all entries."""
        pts = []
        for e in self.entries:
            a, b, c = e.triple.clamped()
            pts.append((min(a, c), min(b, max(c - min(a, c), 0.0))))
            pts.append((min(a, max(c - min(b, c), 0.0)), min(b, c)))
        return pts

    def to_csv(self) -> str:
        lines = ["policy_id,r1,r2,rsum"]
        for e in self.entries:
            a, b, c = e.triple.clamped()
            lines.append(f"{e.policy_id},{a:.12g},{b:.12g},{c:.12g}")
        return "\n".join(lines) + "\n"


def _random_simplex(rng_gen, shape, cond_axes):
    """Dirichlet(1) draw over the trailing axes for each leading index."""
    x = rng_gen.exponential(size=shape)
    flat = x.reshape(shape[:cond_axes] + (-1,))
    flat /= flat.sum(axis=-1, keepdims=True)
    return flat.reshape(shape)


_RESOLUTIONS = (0.25, 0.125, 0.0625, 0.03125, 0.015625)


def _ascend_slices(slices, evaluate, passes: int = 3):
    """Cyclic coordinate ascent by pairwise mass moves at refining grid steps.

    `slices` is a list of 1-D views into the policy tables (each a
    distribution); `evaluate` recomputes the objective from the tables.
    Mutates the tables in place and returns the best objective seen.
    """
    best = evaluate()
    for step in _RESOLUTIONS:
        for _ in range(passes):
            improved = False
            for dist in slices:
                m = dist.shape[0]
                if m < 2:
                    continue
                for i in range(m):
                    for j in range(m):
                        if i == j:
                            continue
                        take = min(step, float(dist[i]))
                        if take <= 1e-15:
                            break  # nothing left to move from atom i
                        old_i, old_j = float(dist[i]), float(dist[j])
                        dist[i] = old_i - take
                        dist[j] = old_j + take
                        val = evaluate()
                        if val > best + 1e-12:
                            best = val
                            improved = True
                        else:
                            dist[i] = old_i
                            dist[j] = old_j
            if not improved:
                break
    return best


def _objective(triple: RateTriple, which: str) -> float:
    if which == "rsum":
        return triple.rsum_max
    if which == "r1":
        return triple.r1_max + 0.25 * triple.rsum_max
    if which == "r2":
        return triple.r2_max + 0.25 * triple.rsum_max
    raise InvalidParameterError(f"unknown objective {which!r}")


_OBJECTIVE_CYCLE = ("rsum", "r1", "r2")


def maximize_inner(
    channel: FiniteChannel,
    cards=None,
    budget: int = 200,
    seed: int = 0,
    seed_policies=(),
) -> DmRegion:
    """Multistart search over inner policies; deterministic given arguments.

    `budget` is the number of random restarts; restarts cycle through
    sum-rate and single-user objectives so the union of pentagons covers the
    region's corners.  Returns every restart's best policy and triple.
    """
    if cards is None:
        cards = default_cards(channel)
    nu, nv1, nv2 = cards
    ns, n1, n2 = channel.n_s, channel.n_x1, channel.n_x2
    rng_gen = np.random.default_rng(seed)
    entries = []

    def make_entry(pid, policy):
        entries.append(PolicyEntry(pid, inner_rate_triple(channel, policy), policy))

    for pid, pol in enumerate(seed_policies):
        make_entry(-1 - pid, pol)

    for restart in range(budget):
        objective = _OBJECTIVE_CYCLE[restart % len(_OBJECTIVE_CYCLE)]
        p_u = _random_simplex(rng_gen, (ns, nu), 1)
        p1 = _random_simplex(rng_gen, (nu, ns, nv1, n1), 2)
        p2 = _random_simplex(rng_gen, (nu, ns, nv2, n2), 2)

        slices = [p_u[s] for s in range(ns)]
        slices += [p1[u, s].reshape(-1) for u in range(nu) for s in range(ns)]
        slices += [p2[u, s].reshape(-1) for u in range(nu) for s in range(ns)]

        def evaluate():
            return _objective(_fast_inner_triple(channel, p_u, p1, p2), objective)

        _ascend_slices(slices, evaluate)
        for dist in slices:  # remove accumulated float drift before freezing
            dist /= dist.sum()
        make_entry(restart, InnerPolicy(p_u=p_u.copy(), p1=p1.copy(), p2=p2.copy()))

    entries.sort(key=lambda e: e.triple.key(), reverse=True)
    return DmRegion(entries=tuple(entries), kind="inner")


def maximize_outer(
    channel: FiniteChannel,
    cards=None,
    budget: int = 200,
    seed: int = 0,
    seed_policies=(),
) -> DmRegion:
    """Multistart search over outer policies.

    The true outer bound is a supremum over an unbounded family; a finite
    search only produces a lower estimate of it, and the result is labeled
    kind="outer" to flag that caveat.  `seed_policies` (e.g. policies induced
    from inner optima) are evaluated first and kept in the region.
    """
    if cards is None:
        c = default_cards(channel)
        cards = (c[1], c[2])
    nv1, nv2 = cards[-2], cards[-1]
    ns, n1, n2 = channel.n_s, channel.n_x1, channel.n_x2
    rng_gen = np.random.default_rng(seed)
    entries = []

    def make_entry(pid, policy):
        entries.append(PolicyEntry(pid, outer_rate_triple(channel, policy), policy))

    for pid, pol in enumerate(seed_policies):
        make_entry(-1 - pid, pol)

    for restart in range(budget):
        objective = _OBJECTIVE_CYCLE[restart % len(_OBJECTIVE_CYCLE)]
        table = _random_simplex(rng_gen, (ns, nv1, nv2, n1, n2), 1)
        slices = [table[s].reshape(-1) for s in range(ns)]

        def evaluate():
            return _objective(_fast_outer_triple(channel, table), objective)

        _ascend_slices(slices, evaluate)
        for dist in slices:
            dist /= dist.sum()
        make_entry(restart, OuterPolicy(table=table.copy()))

    entries.sort(key=lambda e: e.triple.key(), reverse=True)
    return DmRegion(entries=tuple(entries), kind="outer")


def induced_outer_policy(policy: InnerPolicy) -> OuterPolicy:
    """Marginalize the inner factorization into P(v1,v2,x1,x2|s)."""
    table = np.einsum("su,usva,uswb->svwab", policy.p_u, policy.p1, policy.p2)
    return OuterPolicy(table=table)


def exhaustive_sum_oracle(channel: FiniteChannel, resolution: int = 8) -> float:
    """Coarse exhaustive maximization of the inner sum bound for |U| = 1 and
    binary V1, V2.

    Family: per user, x_i is a deterministic function of (v_i, s) and
    P(v_i|s) lies on the uniform grid with spacing 1/resolution.  For a fixed
    v-marginal the sum expression is convex in each user's x-conditional, so
    deterministic maps attain the per-coordinate maximum; the only coarseness
    is the v-grid.  Fully enumerated and vectorized.
    """
    ns, n1, n2, ny = channel.n_s, channel.n_x1, channel.n_x2, channel.n_y
    if ns != 2 or n1 != 2 or n2 != 2:
        raise InvalidParameterError("oracle supports binary-input channels with binary state")
    nv = 2
    grid = np.linspace(0.0, 1.0, resolution + 1)

    def user_candidates(nx: int) -> np.ndarray:
        """(ncand, s, v, x) conditionals P(v,x|s) for one user."""
        maps = []
        for code in range(nx ** (nv * ns)):
            f = np.zeros((nv, ns), dtype=int)
            c = code
            for v in range(nv):
                for s in range(ns):
                    f[v, s] = c % nx
                    c //= nx
            maps.append(f)
        cands = []
        for f in maps:
            for pv0_s0 in grid:
                for pv0_s1 in grid:
                    pv = np.array([[pv0_s0, 1.0 - pv0_s0], [pv0_s1, 1.0 - pv0_s1]])
                    t = np.zeros((ns, nv, nx))
                    for s in range(ns):
                        for v in range(nv):
                            t[s, v, f[v, s]] = pv[s, v]
                    cands.append(t)
        return np.array(cands)

    c1 = user_candidates(n1)  # (N1, s, v1, x1)
    c2 = user_candidates(n2)  # (N2, s, v2, x2)
    # Per-candidate1 contraction with the channel: (N1, s, v1, x2, y)
    u1 = np.einsum("Isva,saby->Isvby", c1, channel.w, optimize=True)

    def batch_entropy(p: np.ndarray) -> np.ndarray:
        """Entropy over all but the leading two axes."""
        flat = p.reshape(p.shape[0], p.shape[1], -1)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(flat > 0, flat * np.log(flat), 0.0)
        return -terms.sum(axis=-1) / _LOG2

    best = -math.inf
    chunk = max(1, 2_000_000 // max(1, c1.shape[0] * ns * nv * nv * ny))
    for j0 in range(0, c2.shape[0], chunk):
        c2b = c2[j0 : j0 + chunk]
        # joint over (I, J, s, v1, v2, y), weighted by p_s
        p = np.einsum("Isvby,Jswb,s->IJsvwy", u1, c2b, channel.p_s, optimize=True)
        pv = p.sum(axis=(2, 5))  # (I,J,v1,v2)
        py = p.sum(axis=(2, 3, 4))  # (I,J,y)
        pvy = p.sum(axis=2)  # (I,J,v1,v2,y)
        pvs = p.sum(axis=5)  # (I,J,s,v1,v2) -> reorder not needed for entropy
        h_v = batch_entropy(pv)
        h_y = batch_entropy(py)
        h_vy = batch_entropy(pvy)
        h_s = _entropy(channel.p_s)
        h_vs = batch_entropy(pvs)
        i_vy = h_v + h_y - h_vy
        i_vs = h_v + h_s - h_vs
        val = (i_vy - i_vs).max()
        best = max(best, float(val))
    return best
