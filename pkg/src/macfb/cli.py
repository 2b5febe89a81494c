"""Command-line front end.

Subcommands: gains, region, hybrid, simulate, invariance, decay, dm-inner,
dm-outer, dm-gamma.  Machine-readable output (JSON or CSV) goes to stdout or
to --out FILE; diagnostics go to stderr.  Exit codes: 0 success, 2 flag
validation failure, 3 numerical non-convergence.  Output is byte-identical
for identical argv and seed; --threads is accepted for interface stability
but execution is deterministic regardless of its value.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import dm_state, montecarlo, regions, riccati
from .codec import GaussianMacConfig
from .errors import ConvergenceError, InvalidParameterError


def _json_dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _positive(parser, name, value, allow_zero=False):
    if value is None:
        parser.error(f"{name} is required")
    if allow_zero and value < 0:
        parser.error(f"{name} must be >= 0, got {value}")
    if not allow_zero and value <= 0:
        parser.error(f"{name} must be > 0, got {value}")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="macfb",
        description=(
            "Feedback coding and rate regions for the two-user Gaussian MAC "
            "with known additive interference, plus finite-alphabet bounds."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *names):
        if "p1" in names:
            p.add_argument("--p1", type=float, help="user-1 average power (>= 0)")
        if "p2" in names:
            p.add_argument("--p2", type=float, help="user-2 average power (>= 0)")
        if "noise" in names:
            p.add_argument("--noise", type=float, help="channel noise variance (> 0)")
        if "state-var" in names:
            p.add_argument(
                "--state-var", type=float, default=0.0,
                help="interference variance (>= 0, default 0)",
            )
        if "n" in names:
            p.add_argument(
                "--n", type=int, action="append",
                help="block length (>= 3); repeatable for decay probes",
            )
        if "rates" in names:
            p.add_argument("--r1", type=float, help="user-1 rate, bits/use")
            p.add_argument("--r2", type=float, help="user-2 rate, bits/use")
        if "trials" in names:
            p.add_argument("--trials", type=int, default=10000, help="Monte Carlo trials")
        if "seed" in names:
            p.add_argument("--seed", type=int, default=0, help="RNG seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker hint; output is independent of this value")
        p.add_argument("--out", type=str, default=None,
                       help="write the payload to FILE instead of stdout")

    p = sub.add_parser("gains", help="scheme gains for given powers (JSON)")
    add_common(p, "p1", "p2", "noise")

    p = sub.add_parser("region", help="rate-region boundary sweep (CSV rho,r1,r2,rsum)")
    add_common(p, "p1", "p2", "noise")
    p.add_argument("--grid", type=int, default=101, help="number of rho grid points (>= 2)")

    p = sub.add_parser("hybrid", help="power-split sweep (CSV alpha,rho,r1,r2)")
    add_common(p, "p1", "p2", "noise")
    p.add_argument("--grid", type=int, default=11, help="number of alpha points (>= 2)")
    p.add_argument("--alpha", type=float, default=None,
                   help="single alpha in [0,1] instead of a sweep")
    p.add_argument("--splitter", type=int, choices=(1, 2), default=1,
                   help="user that splits power")

    p = sub.add_parser("simulate", help="Monte Carlo error/power statistics (JSON)")
    add_common(p, "p1", "p2", "noise", "state-var", "n", "rates", "trials", "seed")

    p = sub.add_parser("invariance", help="paired-state invariance probe (JSON)")
    add_common(p, "p1", "p2", "noise", "state-var", "n", "rates", "trials", "seed")

    p = sub.add_parser("decay", help="error-variance decay probe (CSV)")
    add_common(p, "p1", "p2", "noise", "state-var", "n", "rates", "trials", "seed")

    for cmd, help_text in (
        ("dm-inner", "achievable-region search (CSV policy_id,r1,r2,rsum)"),
        ("dm-outer", "outer-bound search, lower estimate (CSV policy_id,r1,r2,rsum)"),
        ("dm-gamma", "structural class-gamma test (JSON)"),
    ):
        p = sub.add_parser(cmd, help=help_text)
        p.add_argument("--channel", type=str, required=True,
                       help="adder, erasure, or a channel JSON path")
        p.add_argument("--q", type=float, default=0.5,
                       help="state bias for built-in channels (0 <= q <= 1)")
        if cmd != "dm-gamma":
            p.add_argument("--card-u", type=int, default=None, help="|U| for the search")
            p.add_argument("--card-v1", type=int, default=None, help="|V1| for the search")
            p.add_argument("--card-v2", type=int, default=None, help="|V2| for the search")
            p.add_argument("--budget", type=int, default=50, help="restart count")
            p.add_argument("--seed", type=int, default=0, help="RNG seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker hint; output is independent of this value")
        p.add_argument("--out", type=str, default=None,
                       help="write the payload to FILE instead of stdout")

    return parser


def _load_channel_arg(parser, spec: str, q: float) -> dm_state.FiniteChannel:
    if spec in ("adder", "erasure"):
        if not 0.0 <= q <= 1.0:
            parser.error(f"--q must be in [0, 1], got {q}")
        return dm_state.builtin_channel(spec, q)
    return dm_state.load_channel(spec)


def _sim_config(parser, args) -> tuple:
    p1 = _positive(parser, "--p1", args.p1, allow_zero=True)
    p2 = _positive(parser, "--p2", args.p2, allow_zero=True)
    noise = _positive(parser, "--noise", args.noise)
    if args.state_var < 0:
        parser.error(f"--state-var must be >= 0, got {args.state_var}")
    if args.r1 is None or args.r2 is None:
        parser.error("--r1 and --r2 are required")
    if args.r1 <= 0 or args.r2 <= 0:
        parser.error(f"--r1/--r2 must be > 0, got ({args.r1}, {args.r2})")
    n_list = args.n if args.n else [20]
    for n in n_list:
        if n < 3:
            parser.error(f"--n must be >= 3, got {n}")
    if args.trials < 1:
        parser.error(f"--trials must be >= 1, got {args.trials}")
    if args.threads < 1:
        parser.error(f"--threads must be >= 1, got {args.threads}")
    cfg = GaussianMacConfig(
        p1=p1, p2=p2, sigma_s2=args.state_var, sigma_z2=noise,
        n=n_list[0], r1=args.r1, r2=args.r2,
    )
    sim = montecarlo.SimConfig(
        config=cfg, trials=args.trials, seed=args.seed,
        state_kind="gaussian" if args.state_var > 0 else "zero",
    )
    return sim, n_list


def _cmd_gains(parser, args) -> str:
    p1 = _positive(parser, "--p1", args.p1, allow_zero=True)
    p2 = _positive(parser, "--p2", args.p2, allow_zero=True)
    noise = _positive(parser, "--noise", args.noise)
    point, rho = regions.sum_capacity_point(p1, p2, noise)
    a1, a2 = regions.rates_to_gains(point.r1, point.r2)
    payload = {
        "a1": a1, "a2": a2, "r1": point.r1, "r2": point.r2, "rho": rho,
        "p1": p1, "p2": p2, "sigma_z2": noise,
    }
    if abs(a1) > 1 and abs(a2) > 1:
        gains = riccati.gain_set(a1, a2, noise)
        payload.update(
            {
                "l1": gains.l1, "l2": gains.l2,
                "big_l1": gains.big_l[0], "big_l2": gains.big_l[1],
                "q11": gains.q_ss.q11, "q22": gains.q_ss.q22, "q12": gains.q_ss.q12,
            }
        )
    else:
        print("degenerate point: at least one gain has |a| = 1; no recursion gains",
              file=sys.stderr)
    return _json_dumps(payload)


def _cmd_region(parser, args) -> str:
    p1 = _positive(parser, "--p1", args.p1, allow_zero=True)
    p2 = _positive(parser, "--p2", args.p2, allow_zero=True)
    noise = _positive(parser, "--noise", args.noise)
    if args.grid < 2:
        parser.error(f"--grid must be >= 2, got {args.grid}")
    return regions.region_sweep(p1, p2, noise, args.grid).to_csv()


def _cmd_hybrid(parser, args) -> str:
    p1 = _positive(parser, "--p1", args.p1, allow_zero=True)
    p2 = _positive(parser, "--p2", args.p2, allow_zero=True)
    noise = _positive(parser, "--noise", args.noise)
    if args.alpha is not None:
        if not 0.0 <= args.alpha <= 1.0:
            parser.error(f"--alpha must be in [0, 1], got {args.alpha}")
        alphas = [args.alpha]
    else:
        if args.grid < 2:
            parser.error(f"--grid must be >= 2, got {args.grid}")
        alphas = [i / (args.grid - 1) for i in range(args.grid)]
    pts = regions.hybrid_sweep(p1, p2, noise, alphas, args.splitter)
    lines = ["alpha,rho,r1,r2"]
    for pt in pts:
        lines.append(f"{pt.alpha:.12g},{pt.rho_star:.12g},{pt.r1:.12g},{pt.r2:.12g}")
    return "\n".join(lines) + "\n"


def _cmd_simulate(parser, args) -> str:
    sim, _ = _sim_config(parser, args)
    gains = montecarlo.gains_for_config(sim.config)
    stats = montecarlo.run_trials(sim, gains)
    return _json_dumps(stats.to_json_dict())


def _cmd_invariance(parser, args) -> str:
    sim, _ = _sim_config(parser, args)
    if sim.state_kind == "zero":
        parser.error("--state-var must be > 0 for the invariance probe")
    gains = montecarlo.gains_for_config(sim.config)
    delta = montecarlo.state_invariance_check(sim, gains)
    return _json_dumps(
        {
            "max_abs_delta": delta,
            "pairs": sim.trials,
            "n": sim.config.n,
            "sigma_s2": sim.config.sigma_s2,
            "seed": sim.seed,
        }
    )


def _cmd_decay(parser, args) -> str:
    sim, n_list = _sim_config(parser, args)
    if args.n is None:
        n_list = [10, 15, 20]
    gains = montecarlo.gains_for_config(sim.config)
    rows = montecarlo.decay_probe(sim, gains, n_list)
    lines = ["n,eps_var_1,eps_var_pred_1,eps_var_2,eps_var_pred_2,pe_1,pe_2"]
    for r in rows:
        lines.append(
            f"{r.n},{r.eps_var_1:.12g},{r.eps_var_pred_1:.12g},"
            f"{r.eps_var_2:.12g},{r.eps_var_pred_2:.12g},{r.pe_1:.12g},{r.pe_2:.12g}"
        )
    return "\n".join(lines) + "\n"


def _cmd_dm_search(parser, args, inner: bool) -> str:
    channel = _load_channel_arg(parser, args.channel, args.q)
    defaults = dm_state.default_cards(channel)
    cu = args.card_u if args.card_u is not None else defaults[0]
    cv1 = args.card_v1 if args.card_v1 is not None else defaults[1]
    cv2 = args.card_v2 if args.card_v2 is not None else defaults[2]
    for name, val in (("--card-u", cu), ("--card-v1", cv1), ("--card-v2", cv2)):
        if val < 1:
            parser.error(f"{name} must be >= 1, got {val}")
    if args.budget < 1:
        parser.error(f"--budget must be >= 1, got {args.budget}")
    if inner:
        region = dm_state.maximize_inner(
            channel, cards=(cu, cv1, cv2), budget=args.budget, seed=args.seed
        )
    else:
        region = dm_state.maximize_outer(
            channel, cards=(cv1, cv2), budget=args.budget, seed=args.seed
        )
        print("outer search reports a lower estimate of the outer bound",
              file=sys.stderr)
    best = region.best().triple.clamped()
    print(f"best pentagon: r1<={best[0]:.6f} r2<={best[1]:.6f} rsum<={best[2]:.6f}",
          file=sys.stderr)
    return region.to_csv()


def _cmd_dm_gamma(parser, args) -> str:
    channel = _load_channel_arg(parser, args.channel, args.q)
    ok, witness = dm_state.class_gamma_check(channel)
    payload = {"class_gamma": ok, "witness": None}
    if witness is not None:
        payload["witness"] = {
            side: {"s": t[0], "other_input": t[1], "y": t[2],
                   "candidates": [t[3], t[4]]}
            for side, t in witness.items()
        }
    return _json_dumps(payload)


def dispatch(argv=None) -> int:
    """Parse argv, run the subcommand, write payload to stdout or --out."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gains":
            payload = _cmd_gains(parser, args)
        elif args.command == "region":
            payload = _cmd_region(parser, args)
        elif args.command == "hybrid":
            payload = _cmd_hybrid(parser, args)
        elif args.command == "simulate":
            payload = _cmd_simulate(parser, args)
        elif args.command == "invariance":
            payload = _cmd_invariance(parser, args)
        elif args.command == "decay":
            payload = _cmd_decay(parser, args)
        elif args.command == "dm-inner":
            payload = _cmd_dm_search(parser, args, inner=True)
        elif args.command == "dm-outer":
            payload = _cmd_dm_search(parser, args, inner=False)
        elif args.command == "dm-gamma":
            payload = _cmd_dm_gamma(parser, args)
        else:  # pragma: no cover - argparse enforces the choices
            parser.error(f"unknown command {args.command!r}")
    except ConvergenceError as exc:
        print(f"error: failed to converge: {exc}", file=sys.stderr)
        return 3
    except InvalidParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
