"""Seeded experiment runner: dimension x bases x shots sweeps with CSV output.

Every trial derives its own seed from (seed, cell coordinates, trial index)
through numpy's SeedSequence, so results are independent of worker count and
execution order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bases import TreeBasisParams, canonical_basis, random_subspace_basis, tree_basis
from .measurement import EXACT, measure
from .noise import reconstruct_noise_corrected
from .reconstruction import reconstruct
from .states import NoisyState, haar_random_state
from .tree import build_tree

CSV_HEADER = (
    "dim,n_bases,shots,trials,median_infidelity,q1_infidelity,q3_infidelity,"
    "fallback_rate,failed_trials,lambda_hat_mean,seed"
)

BASIS_MODE_TREE = "tree"
BASIS_MODE_RANDOM = "random"


@dataclass(frozen=True)
class ExperimentConfig:
    dims: tuple
    bases_counts: tuple
    shots_list: tuple  # ints or EXACT
    trials: int = 100
    seed: int = 0
    noise_lambda: float = 0.0
    basis_mode: str = BASIS_MODE_TREE
    correct_noise: bool = False
    workers: int = 1

    def __post_init__(self):
        if any(n < 3 for n in self.bases_counts):
            raise ValueError("at least 3 bases are required")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0.0 <= self.noise_lambda <= 1.0:
            raise ValueError("noise lambda must lie in [0, 1]")
        if self.basis_mode not in (BASIS_MODE_TREE, BASIS_MODE_RANDOM):
            raise ValueError(f"unknown basis mode {self.basis_mode!r}")
        if self.correct_noise and self.noise_lambda == 0.0:
            raise ValueError("--correct-noise requires a nonzero noise lambda")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class CellResult:
    dim: int
    n_bases: int
    shots: object
    trials: int
    median_infidelity: float
    q1_infidelity: float
    q3_infidelity: float
    fallback_rate: float
    failed_trials: int
    lambda_hat_mean: float | None
    seed: int

    def csv_row(self) -> str:
        shots = EXACT if self.shots == EXACT else str(int(self.shots))
        lam = "" if self.lambda_hat_mean is None else repr(float(self.lambda_hat_mean))
        return (
            f"{self.dim},{self.n_bases},{shots},{self.trials},"
            f"{float(self.median_infidelity)!r},{float(self.q1_infidelity)!r},"
            f"{float(self.q3_infidelity)!r},{float(self.fallback_rate)!r},"
            f"{self.failed_trials},{lam},{self.seed}"
        )


def trial_bases(tree, n_bases, basis_mode, seed_seq):
    """Canonical basis plus n_bases - 1 seeded non-canonical bases."""
    bases = [canonical_basis(tree.dim)]
    if basis_mode == BASIS_MODE_TREE:
        rng = np.random.default_rng(seed_seq)
        inv = 1.0 / math.sqrt(2.0)
        for phi in rng.uniform(0.0, 2.0 * math.pi, n_bases - 1):
            bases.append(tree_basis(tree, TreeBasisParams(inv, inv, float(phi))))
    else:
        for child in seed_seq.spawn(n_bases - 1):
            bases.append(random_subspace_basis(tree, child))
    return bases


def run_trial(d, n_bases, shots, seed, trial, noise_lambda, basis_mode, correct_noise):
    """One seeded trial; returns (infidelity, had_fallback, lambda_hat, failed)."""
    shots_key = 0 if shots == EXACT else int(shots)
    ss = np.random.SeedSequence([int(seed), int(d), int(n_bases), shots_key, int(trial)])
    s_state, s_bases, s_meas = ss.spawn(3)
    try:
        target = haar_random_state(d, s_state)
        tree = build_tree(d)
        bases = trial_bases(tree, n_bases, basis_mode, s_bases)
        noisy = NoisyState(target, noise_lambda)
        rng_meas = np.random.default_rng(s_meas)
        freqs = [measure(noisy, b, shots, rng_meas) for b in bases]
        tol = 1e-10 if shots == EXACT else 10.0 / math.sqrt(int(shots))
        n_shots = None if shots == EXACT else int(shots)
        if correct_noise:
            report = reconstruct_noise_corrected(tree, bases, freqs, tol, shots=n_shots)
        else:
            report = reconstruct(tree, bases, freqs, tol, shots=n_shots)
        overlap = np.vdot(target.amplitudes, report.state.amplitudes)
        infid = float(min(1.0, max(0.0, 1.0 - abs(overlap) ** 2)))
        fallback = any(n.status != "ok" for n in report.nodes)
        lam = report.lambda_hat if correct_noise else None
        return (infid, fallback, lam, False)
    except Exception:
        return (math.nan, False, None, True)


def _run_trial_star(args):
    return run_trial(*args)


def run_cell(cfg: ExperimentConfig, d, n_bases, shots, executor=None) -> CellResult:
    args = [
        (d, n_bases, shots, cfg.seed, t, cfg.noise_lambda, cfg.basis_mode, cfg.correct_noise)
        for t in range(cfg.trials)
    ]
    if executor is None:
        results = [run_trial(*a) for a in args]
    else:
        results = list(executor.map(_run_trial_star, args, chunksize=8))
    ok = [r for r in results if not r[3]]
    failed = len(results) - len(ok)
    infids = np.array([r[0] for r in ok]) if ok else np.array([math.nan])
    lam_mean = None
    if cfg.correct_noise and ok:
        lam_mean = float(np.mean([r[2] for r in ok]))
    return CellResult(
        dim=d,
        n_bases=n_bases,
        shots=shots,
        trials=cfg.trials,
        median_infidelity=float(np.median(infids)),
        q1_infidelity=float(np.quantile(infids, 0.25)),
        q3_infidelity=float(np.quantile(infids, 0.75)),
        fallback_rate=(sum(1 for r in ok if r[1]) / len(ok)) if ok else 0.0,
        failed_trials=failed,
        lambda_hat_mean=lam_mean,
        seed=cfg.seed,
    )


def run_experiment(cfg: ExperimentConfig, out_path=None):
    """Run the full grid; returns (results, csv_text) and optionally writes the CSV."""
    out_fh = open(out_path, "w") if out_path is not None else None
    try:
        results = []
        if cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
                for d in cfg.dims:
                    for n_bases in cfg.bases_counts:
                        for shots in cfg.shots_list:
                            results.append(run_cell(cfg, d, n_bases, shots, ex))
        else:
            for d in cfg.dims:
                for n_bases in cfg.bases_counts:
                    for shots in cfg.shots_list:
                        results.append(run_cell(cfg, d, n_bases, shots))
        csv_text = CSV_HEADER + "\n" + "".join(r.csv_row() + "\n" for r in results)
        if out_fh is not None:
            out_fh.write(csv_text)
        return results, csv_text
    finally:
        if out_fh is not None:
            out_fh.close()


def summary_table(results) -> str:
    lines = [f"{'dim':>4} {'bases':>5} {'shots':>8} {'median':>12} {'IQR':>26} {'fallback':>8}"]
    for r in results:
        shots = r.shots if r.shots == EXACT else str(int(r.shots))
        iqr = f"[{r.q1_infidelity:.3e}, {r.q3_infidelity:.3e}]"
        lines.append(
            f"{r.dim:>4} {r.n_bases:>5} {shots:>8} {r.median_infidelity:>12.3e} "
            f"{iqr:>26} {r.fallback_rate:>8.2f}"
        )
    return "\n".join(lines)
