"""Command line interface.

``randtheil run``          estimate the expected Theil entropy trajectory
``randtheil changepoint``  locate 1-3 change points of the community dynamics
``randtheil synth``        write a synthetic dataset in the CSV container format
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .changepoint import ChangePointQuery, detect_change_points
from .copula import CopulaSpec
from .empirical import fit_family, histogram_rows
from .engine import SimulationConfig, estimate_entropy
from .errors import RandTheilError
from .io import (
    Series,
    load_matrix,
    render_entropy_svg,
    render_histogram_svg,
    render_svg,
    write_entropy_csv,
    write_histogram_csv,
    write_matrices,
    write_profile_csv,
)
from .markov import count_transitions, estimate_transition_matrix, stationary_distribution
from .model import AttributeObservations, EntropyTrajectory, SegmentedChain, validate_trajectories

log = logging.getLogger("randtheil")
PROG = "randtheil"


class CliError(RandTheilError):
    pass


def _range(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:STOP, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return v


def _add_community_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("-m", "--community-file", required=True, type=Path, help="CSV file with the community matrix")
    p.add_argument("-M", "--community-name", default="ratings", help="matrix name inside the file (default: ratings)")
    p.add_argument("-D", "--communities", type=int, default=None, help="number of communities (default: largest label)")
    p.add_argument("--transpose", action="store_true", help="matrices are stored time x individuals")
    p.add_argument("-o", "--output", type=Path, default=Path("."), help="output directory (default: .)")
    p.add_argument("--threads", type=_positive_int, default=None, help="worker threads (default: $RANDENTROPY_THREADS or 1)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte Carlo estimate of the expected Theil entropy")
    _add_community_args(run)
    run.add_argument("-b", "--attribute-file", type=Path, default=None, help="CSV file with the attribute matrix (default: the community file)")
    run.add_argument("-B", "--attribute-name", default="interest_rates", help="attribute matrix name (default: interest_rates)")
    run.add_argument("-s", "--bin-width", type=_positive_float, default=0.25, help="histogram bin width (default: 0.25)")
    run.add_argument("-t", "--horizon", type=_positive_int, default=36, help="simulated steps (default: 36)")
    run.add_argument("-n", "--iterations", type=_positive_int, default=1000, help="Monte Carlo replications (default: 1000)")
    run.add_argument("-i", "--stationary", action="store_true", help="start each replication from the stationary distribution")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--copula", choices=("independence", "clayton", "gaussian"), default="independence")
    run.add_argument("--theta", type=float, default=None, help="copula dependence parameter")
    run.add_argument("--change-points", type=_int_list, default=None, help="comma-separated change points of the observed window; the last segment drives the forecast")
    run.add_argument("--step-quantile", action="store_true", help="sample bin midpoints instead of interpolating within bins")
    run.add_argument("--pooled-fallback", action="store_true", help="use the pooled distribution for communities without observations")
    run.add_argument("--log-base", type=_positive_float, default=None, help="report entropy in this log base (default: natural log)")
    run.set_defaults(func=cmd_run)

    cp = sub.add_parser("changepoint", help="maximum-likelihood change-point detection")
    _add_community_args(cp)
    cp.add_argument("-c", "--num-cps", type=int, choices=(1, 2, 3), default=1, help="number of change points (default: 1)")
    for i in (1, 2, 3):
        cp.add_argument(f"--cp{i}-range", type=_range, default=None, metavar="START:STOP", help=f"search range of change point {i}")
    cp.add_argument("--delta", type=_positive_int, default=None, help="minimum distance between consecutive change points")
    cp.set_defaults(func=cmd_changepoint)

    syn = sub.add_parser("synth", help="write a synthetic two-regime dataset")
    syn.add_argument("-o", "--output", type=Path, required=True, help="output CSV file")
    syn.add_argument("--individuals", type=_positive_int, default=26)
    syn.add_argument("--times", type=_positive_int, default=200)
    syn.add_argument("--change-point", type=int, default=120)
    syn.add_argument("--seed", type=int, default=0)
    syn.set_defaults(func=cmd_synth)
    return parser


def _load_trajectories(args):
    raw = load_matrix(args.community_file, args.community_name, args.transpose)
    d = args.communities
    if d is None:
        finite = raw[np.isfinite(raw)]
        d = max(2, int(finite.max())) if finite.size else 2
    return validate_trajectories(raw, d)


def _print_matrix(title: str, p: np.ndarray) -> None:
    print(title)
    for row in p:
        print("  " + " ".join(f"{v:8.5f}" for v in row))


def cmd_run(args) -> int:
    traj = _load_trajectories(args)
    attr_file = args.attribute_file or args.community_file
    attrs = AttributeObservations(load_matrix(attr_file, args.attribute_name, args.transpose))
    if attrs.shape != traj.data.shape:
        raise CliError(f"attribute matrix {attrs.shape} does not match community matrix {traj.data.shape}")

    cps = sorted(set(args.change_points or []))
    if cps and (cps[0] < 1 or cps[-1] >= traj.n_times - 1):
        raise CliError(f"change points must lie in [1, {traj.n_times - 2}]")
    edges = [0, *cps, traj.n_times - 1]
    matrices = [estimate_transition_matrix(count_transitions(traj, a, b)) for a, b in zip(edges, edges[1:])]
    chain = SegmentedChain.homogeneous(matrices[-1])

    family = fit_family(traj, attrs, args.bin_width, step=args.step_quantile)
    if args.pooled_fallback:
        family = family.with_fallback()

    theta = args.theta if args.copula != "independence" else None
    cfg = SimulationConfig(
        horizon=args.horizon,
        replications=args.iterations,
        seed=args.seed,
        initial_mode="stationary" if args.stationary else "last_observed",
        copula=CopulaSpec(args.copula, theta),
        bin_width=args.bin_width,
    )
    initial = traj.n_individuals if args.stationary else traj.last_observed()

    if args.verbose:
        for i, m in enumerate(matrices):
            span = f"[{edges[i]}, {edges[i + 1]})"
            _print_matrix(f"transition matrix, transitions {span}:", m.p)
        if args.stationary:
            st = stationary_distribution(chain.matrices[0])
            print("stationary distribution: " + " ".join(f"{v:.6f}" for v in st.pi)
                  + ("" if st.unique else "  (not unique)"))
        for x, dist in enumerate(family.per_community):
            print(f"community {x + 1}: " + ("no observations" if dist is None else
                  " ".join(f"[{l:g},{r:g}):{c}" for l, r, c in histogram_rows(dist) if c)))

    result = estimate_entropy(chain, family, cfg, initial, workers=args.threads)
    if args.log_base is not None:
        scale = 1.0 / math.log(args.log_base)
        result = EntropyTrajectory(result.mean * scale, result.sigma * scale, result.n_replications, result.seed)

    out = args.output
    out.mkdir(parents=True, exist_ok=True)
    write_entropy_csv(result, out / "entropy.csv")
    render_entropy_svg(result, out / "entropy.svg")
    for x, dist in enumerate(family.per_community):
        if dist is not None:
            rows = histogram_rows(dist)
            write_histogram_csv(rows, out / f"histogram_community_{x + 1}.csv")
            render_histogram_svg(rows, out / f"histogram_community_{x + 1}.svg", f"Community {x + 1}")
    print(f"seed: {result.seed}")
    print(f"wrote {out / 'entropy.csv'} and {out / 'entropy.svg'}")
    if args.verbose:
        print("h,mean,sigma")
        for h, (m, s) in enumerate(zip(result.mean, result.sigma), 1):
            print(f"{h},{m:.6f},{s:.6f}")
    return 0


def cmd_changepoint(args) -> int:
    traj = _load_trajectories(args)
    ranges = [getattr(args, f"cp{i}_range") for i in (1, 2, 3)]
    given = ranges[: args.num_cps]
    query = ChangePointQuery(
        args.num_cps,
        tuple(given) if any(r is not None for r in given) else None,
        args.delta,
    )
    res = detect_change_points(traj, query, workers=args.threads)

    print("change points: " + ", ".join(str(p) for p in res.positions))
    print(f"log-likelihood (piecewise):   {res.loglik_piecewise:.6f}")
    print(f"log-likelihood (homogeneous): {res.loglik_homogeneous:.6f}")
    print(f"Lambda: {res.lambda_stat:.6f}  (approx. chi2 df={res.df}, p={res.p_value:.4g})")
    for i, m in enumerate(res.segment_matrices):
        _print_matrix(f"segment {i} transition matrix:", m.p)

    out = args.output
    out.mkdir(parents=True, exist_ok=True)
    write_profile_csv(res.likelihood_profile, out / "likelihood_profile.csv")
    pos = sorted(res.likelihood_profile)
    render_svg(
        [Series("log-likelihood", pos, [res.likelihood_profile[p] for p in pos])],
        out / "likelihood_profile.svg",
        title="Profile log-likelihood",
        xlabel="first change point",
        ylabel="log-likelihood",
    )
    summary = {
        "positions": list(res.positions),
        "loglik_piecewise": res.loglik_piecewise,
        "loglik_homogeneous": res.loglik_homogeneous,
        "lambda": res.lambda_stat,
        "chi2_df": res.df,
        "chi2_p_value_approx": res.p_value,
        "segment_matrices": [m.p.tolist() for m in res.segment_matrices],
    }
    (out / "changepoints.json").write_text(json.dumps(summary, indent=2) + "\n")
    return 0


def synthetic_dataset(n: int, t: int, tau: int, seed: int) -> dict[str, np.ndarray]:
    """Three-class two-regime chain with class-dependent, positively correlated attributes."""
    from .markov import simulate_phmc

    p1 = np.array([[0.90, 0.08, 0.02], [0.05, 0.90, 0.05], [0.02, 0.08, 0.90]])
    p2 = np.array([[0.40, 0.50, 0.10], [0.05, 0.40, 0.55], [0.05, 0.15, 0.80]])
    chain = SegmentedChain((tau,), (p1, p2))
    rng = np.random.default_rng(seed)
    x0 = rng.integers(0, 3, size=n)
    traj = simulate_phmc(chain, x0, t - 1, rng)
    level = np.array([1.0, 3.0, 6.0])[traj.data]
    common = rng.normal(size=(1, t))
    noise = np.exp(0.25 * (0.6 * common + 0.8 * rng.normal(size=(n, t))))
    rates = np.round(level * noise, 2)
    return {"ratings": traj.labels(), "interest_rates": rates}


def cmd_synth(args) -> int:
    data = synthetic_dataset(args.individuals, args.times, args.change_point, args.seed)
    write_matrices(args.output, data)
    print(f"wrote {args.output}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"{PROG}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
