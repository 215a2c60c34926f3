"""Command-line interface: bench sweeps, single reconstructions, basis export.

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .bases import (
    TreeBasisParams,
    canonical_basis,
    random_subspace_basis,
    save_basis,
    tree_basis,
)
from .bench import ExperimentConfig, run_experiment, summary_table
from .measurement import EXACT, measure
from .noise import reconstruct_noise_corrected
from .reconstruction import make_degenerate_state, reconstruct, save_report
from .states import NoisyState, infidelity, load_state, save_state
from .tree import build_tree


class CliError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _parse_int_list(text, what):
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError as exc:
        raise CliError(f"bad {what} list: {text!r}") from exc


def _parse_shots_list(text):
    out = []
    for tok in text.split(","):
        if tok == EXACT:
            out.append(EXACT)
        else:
            try:
                out.append(int(tok))
            except ValueError as exc:
                raise CliError(f"bad shots value: {tok!r}") from exc
    return tuple(out)


def _seeded_tree_bases(tree, n_bases, seed):
    """Canonical plus n_bases - 1 tree bases, reproducible from one seed.

    The `degenerate` subcommand uses the same derivation, so a state written
    with seed S degenerates under `reconstruct --seed S`.
    """
    ss = np.random.SeedSequence([int(seed), 1])
    rng = np.random.default_rng(ss)
    inv = 1.0 / math.sqrt(2.0)
    phis = rng.uniform(0.0, 2.0 * math.pi, n_bases)  # one spare for the extra basis
    bases = [canonical_basis(tree.dim)]
    bases += [tree_basis(tree, TreeBasisParams(inv, inv, float(p))) for p in phis[: n_bases - 1]]
    return bases, float(phis[n_bases - 1])


def _cmd_bench(args):
    cfg = ExperimentConfig(
        dims=_parse_int_list(args.dims, "dims"),
        bases_counts=_parse_int_list(args.bases, "bases"),
        shots_list=_parse_shots_list(args.shots),
        trials=args.trials,
        seed=args.seed,
        noise_lambda=args.noise,
        basis_mode="tree" if args.basis_mode == "tree" else "random",
        correct_noise=args.correct_noise,
        workers=args.workers,
    )
    results, _ = run_experiment(cfg, args.out)
    print(summary_table(results))
    print(f"wrote {args.out}")
    return 0


def _cmd_reconstruct(args):
    target = load_state(args.state, renormalize=args.renormalize)
    tree = build_tree(target.dim)
    shots = EXACT if args.shots == EXACT else int(args.shots)
    bases, spare_phi = _seeded_tree_bases(tree, args.n_bases, args.seed)
    ss = np.random.SeedSequence([int(args.seed), 2])
    rng_meas = np.random.default_rng(ss)
    noisy = NoisyState(target, args.noise)
    freqs = [measure(noisy, b, shots, rng_meas) for b in bases]
    tol = 1e-10 if shots == EXACT else 10.0 / math.sqrt(shots)
    n_shots = None if shots == EXACT else shots

    def _solve():
        if args.correct_noise:
            return reconstruct_noise_corrected(tree, bases, freqs, tol, shots=n_shots)
        return reconstruct(tree, bases, freqs, tol, shots=n_shots)

    report = _solve()
    if args.extra_basis_on_ambiguity and any(n.status == "ambiguous" for n in report.nodes):
        inv = 1.0 / math.sqrt(2.0)
        extra = tree_basis(tree, TreeBasisParams(inv, inv, spare_phi))
        bases.append(extra)
        freqs.append(measure(noisy, extra, shots, rng_meas))
        report = _solve()
    save_report(args.out, report)
    infid = infidelity(target, report.state)
    flagged = [n.node for n in report.nodes if n.status != "ok"]
    print(f"infidelity vs input state: {infid:.3e}")
    print(f"flagged nodes: {flagged if flagged else 'none'}")
    print(f"wrote {args.out}")
    return 0


def _cmd_bases(args):
    tree = build_tree(args.dim)
    if args.mode == "tree":
        rng = np.random.default_rng(args.seed)
        inv = 1.0 / math.sqrt(2.0)
        basis = tree_basis(tree, TreeBasisParams(inv, inv, float(rng.uniform(0.0, 2.0 * math.pi))))
    else:
        basis = random_subspace_basis(tree, args.seed)
    save_basis(args.out, basis)
    print(f"wrote {args.out}")
    return 0


def _cmd_degenerate(args):
    tree = build_tree(args.dim)
    bases, _ = _seeded_tree_bases(tree, 3, args.seed)
    state = make_degenerate_state(tree, bases, args.node, np.random.SeedSequence([args.seed, 3]))
    save_state(args.out, state)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="treetomo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run an infidelity sweep and write a CSV")
    b.add_argument("--dims", required=True, help="comma-separated dimensions, e.g. 5,10,20,30")
    b.add_argument("--bases", required=True, help="comma-separated basis counts, each >= 3")
    b.add_argument("--shots", required=True, help="comma-separated shot counts or 'exact'")
    b.add_argument("--trials", type=int, default=100)
    b.add_argument("--seed", type=int, default=42)
    b.add_argument("--noise", type=float, default=0.0, help="white-noise mixture parameter")
    b.add_argument("--correct-noise", action="store_true")
    b.add_argument("--basis-mode", choices=["tree", "random"], default="tree")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--out", required=True)
    b.set_defaults(func=_cmd_bench)

    r = sub.add_parser("reconstruct", help="reconstruct a state from simulated measurements")
    r.add_argument("--state", required=True, help="state JSON file")
    r.add_argument("--n-bases", type=int, default=3)
    r.add_argument("--shots", default=EXACT, help="shot count or 'exact'")
    r.add_argument("--seed", type=int, default=7)
    r.add_argument("--noise", type=float, default=0.0)
    r.add_argument("--correct-noise", action="store_true")
    r.add_argument("--extra-basis-on-ambiguity", action="store_true")
    r.add_argument("--renormalize", action="store_true")
    r.add_argument("--out", required=True)
    r.set_defaults(func=_cmd_reconstruct)

    s = sub.add_parser("bases", help="write a measurement basis to JSON")
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--mode", choices=["tree", "random"], default="tree")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_bases)

    g = sub.add_parser("degenerate", help="write an adversarial state for the seeded bases")
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--node", type=int, required=True)
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_degenerate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "reconstruct" and args.n_bases < 3:
            raise CliError("--n-bases must be >= 3")
        return args.func(args)
    except (CliError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
