"""End-to-end acceptance suite.

Each test prints a single PASS/FAIL line (visible with `pytest -s` or on
failure). The shot-count sweeps share one precomputed grid fixture.
"""

import cmath
import itertools
import math
import time

import numpy as np
import pytest

import treetomo as tt
from treetomo.bench import ExperimentConfig, run_cell, run_trial
from treetomo.cli import main as cli_main
from treetomo.noise import estimate_lambda_node
from treetomo.reconstruction import STATUS_OK, solve_phase, two_projector_phase

from conftest import exact_freqs, seeded_tree_bases

GRID_DIMS = (5, 10, 20, 30)
GRID_BASES = (3, 5, 9)
GRID_SHOTS = (2**13, 2**19)
GRID_TRIALS = 100
GRID_SEED = 42


def _check(num, label, ok, detail=""):
    line = f"acceptance {num} ({label}): {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" [{detail}]"
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def grid():
    cfg = ExperimentConfig(
        dims=GRID_DIMS,
        bases_counts=GRID_BASES,
        shots_list=GRID_SHOTS,
        trials=GRID_TRIALS,
        seed=GRID_SEED,
    )
    start = time.monotonic()
    cells = {}
    for d, nb, shots in itertools.product(GRID_DIMS, GRID_BASES, GRID_SHOTS):
        cells[(d, nb, shots)] = run_cell(cfg, d, nb, shots)
    return cells, time.monotonic() - start


def test_criterion_1_exact_frequency_recovery():
    start = time.monotonic()
    total, clean, unflagged_failures = 0, 0, 0
    worst = 0.0
    for d in (2, 3, 4, 5, 8, 16, 32):
        for trial in range(200):
            infid, fallback, _, failed = run_trial(d, 3, tt.EXACT, GRID_SEED, trial, 0.0, "tree", False)
            total += 1
            if not failed and infid < 1e-8:
                clean += 1
                worst = max(worst, infid)
            elif not fallback:
                unflagged_failures += 1
    elapsed = time.monotonic() - start
    ok = clean / total >= 0.999 and unflagged_failures == 0 and elapsed < 60.0
    _check(
        1,
        "exact-frequency recovery",
        ok,
        f"{clean}/{total} clean, worst clean infidelity {worst:.2e}, {elapsed:.1f}s",
    )


def test_criterion_2_d30_three_bases_finite_shots(grid):
    cells, elapsed = grid
    med = cells[(30, 3, 2**19)].median_infidelity
    ok = 1e-3 <= med <= 5e-2 and elapsed < 300.0
    _check(2, "d=30 finite-shot accuracy", ok, f"median {med:.2e}, grid {elapsed:.1f}s")


def test_criterion_3_more_bases_beat_more_shots(grid):
    cells, _ = grid
    many_bases = cells[(30, 9, 2**13)].median_infidelity
    many_shots = cells[(30, 3, 2**19)].median_infidelity
    ok = many_bases < many_shots
    _check(3, "bases vs shots trade-off", ok, f"9x2^13 {many_bases:.2e} vs 3x2^19 {many_shots:.2e}")


def test_criterion_4_shot_count_monotonicity(grid):
    cells, _ = grid
    violations = [
        (d, nb)
        for d in GRID_DIMS
        for nb in GRID_BASES
        if cells[(d, nb, 2**19)].median_infidelity >= cells[(d, nb, 2**13)].median_infidelity
    ]
    _check(4, "shot-count monotonicity", not violations, f"violations: {violations or 'none'}")


def test_criterion_5_phase_solver_oracle():
    rng = np.random.default_rng(2025)
    n_checked = 0
    ok = True
    while n_checked < 1000:
        target = cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        g1 = complex(*rng.standard_normal(2))
        g2 = complex(*rng.standard_normal(2))
        if abs((g1 * g2.conjugate()).imag) < 1e-6 * abs(g1) * abs(g2):
            continue
        rows = [(g1, (g1 * target).real), (g2, (g2 * target).real)]
        closed = two_projector_phase(*rows)
        sol = solve_phase(rows)
        ok &= abs(closed - sol.phase) < 1e-12
        ok &= all(abs((g * sol.phase).real - p) < 1e-10 for g, p in rows)
        n_checked += 1
    for _ in range(100):
        g = complex(*rng.standard_normal(2))
        p = (g * cmath.exp(1j * rng.uniform(0, 2 * math.pi))).real
        amb = solve_phase([(g, p), (2 * g, 2 * p)])
        ok &= amb.status == "ambiguous" and len(amb.candidates) == 2
        for c in amb.candidates:
            ok &= abs(abs(c) - 1.0) < 1e-12 and abs((g * c).real - p) < 1e-12
    _check(5, "phase-solver oracle equivalence", ok, f"{n_checked} two-row systems")


def test_criterion_6_basis_validity():
    rng = np.random.default_rng(99)
    worst = 0.0
    supports_ok = True

    def _audit(tree, basis):
        nonlocal worst, supports_ok
        worst = max(worst, basis.max_gram_deviation())
        for m, row in basis.node_map.items():
            vec = basis.vectors[row]
            mask = np.ones(tree.dim, dtype=bool)
            mask[tree.support_indices(m)] = False
            supports_ok &= bool(np.all(np.abs(vec[mask]) < 1e-12))

    inv = 1.0 / math.sqrt(2.0)
    for _ in range(100):
        d = int(rng.integers(2, 65))
        tree = tt.build_tree(d)
        phi = float(rng.uniform(0, 2 * math.pi))
        _audit(tree, tt.tree_basis(tree, tt.TreeBasisParams(inv, inv, phi)))
        _audit(tree, tt.random_subspace_basis(tree, rng.integers(0, 2**31)))
    ok = worst < 1e-10 and supports_ok
    _check(6, "basis orthonormality and supports", ok, f"max Gram deviation {worst:.2e}")


def test_criterion_7_degeneracy_detection():
    t = tt.build_tree(6)
    flagged = 0
    restored = 0
    for seed in range(100):
        bases = seeded_tree_bases(t, 2, 10_000 + seed)
        psi = tt.make_degenerate_state(t, bases, 2, seed)
        report = tt.reconstruct(t, bases, exact_freqs(psi, bases))
        if report.statuses()[2] != STATUS_OK:
            flagged += 1
        extra = seeded_tree_bases(t, 3, 20_000 + seed)[3]
        more = bases + [extra]
        report4 = tt.reconstruct(t, more, exact_freqs(psi, more))
        if tt.infidelity(psi, report4.state) < 1e-8:
            restored += 1
    false_flags = 0
    for seed in range(10_000):
        bases = seeded_tree_bases(t, 2, seed)
        psi = tt.haar_random_state(6, seed)
        if tt.reconstruct(t, bases, exact_freqs(psi, bases)).flagged_nodes():
            false_flags += 1
    ok = flagged == 100 and restored == 100 and false_flags == 0
    _check(
        7,
        "degeneracy detection",
        ok,
        f"{flagged}/100 flagged, {restored}/100 restored, {false_flags} false flags in 10000",
    )


def test_criterion_8_white_noise_pipeline(tree5):
    lam = 0.05
    psi = tt.haar_random_state(5, 808)
    bases = seeded_tree_bases(tree5, 2, 808)
    freqs = exact_freqs(tt.NoisyState(psi, lam), bases)
    report = tt.reconstruct_noise_corrected(tree5, bases, freqs)
    exact_ok = abs(report.lambda_hat - lam) < 1e-6 and tt.infidelity(psi, report.state) < 1e-8

    lam_errs, corrected, uncorrected = [], [], []
    shots = 2**17
    tol = 10.0 / math.sqrt(shots)
    for trial in range(100):
        ss = np.random.SeedSequence([GRID_SEED, 5, trial]).spawn(3)
        target = tt.haar_random_state(5, ss[0])
        bases = seeded_tree_bases(tree5, 2, ss[1])
        rng = np.random.default_rng(ss[2])
        freqs = [tt.measure(tt.NoisyState(target, lam), b, shots, rng) for b in bases]
        rep_c = tt.reconstruct_noise_corrected(tree5, bases, freqs, tol, shots=shots)
        rep_u = tt.reconstruct(tree5, bases, freqs, tol, shots=shots)
        lam_errs.append(abs(rep_c.lambda_hat - lam))
        corrected.append(tt.infidelity(target, rep_c.state))
        uncorrected.append(tt.infidelity(target, rep_u.state))
    finite_ok = (
        np.median(lam_errs) < 0.02 and np.median(corrected) < np.median(uncorrected)
    )

    round_trip_ok = True
    for lam_g in (0.0, 0.05, 0.2, 0.5):
        for ck2 in (0.05, 0.2, 0.45):
            for total in (0.6, 1.0):
                ck1_2 = total - ck2
                d = 5
                p_k = (1 - lam_g) * ck2 + lam_g / d
                p_k1 = (1 - lam_g) * ck1_2 + lam_g / d
                lam_abs = 2 * (1 - lam_g) * math.sqrt(ck2 * ck1_2)
                round_trip_ok &= abs(estimate_lambda_node(p_k, p_k1, lam_abs, d) - lam_g) < 1e-10

    ok = exact_ok and finite_ok and round_trip_ok
    _check(
        8,
        "white-noise estimation and correction",
        ok,
        f"exact lambda err {abs(report.lambda_hat - lam):.1e}, "
        f"median lambda err {np.median(lam_errs):.3f}, "
        f"corrected {np.median(corrected):.1e} vs uncorrected {np.median(uncorrected):.1e}",
    )


def test_criterion_9_csv_determinism(tmp_path):
    args = [
        "bench",
        "--dims",
        "4,5",
        "--bases",
        "3",
        "--shots",
        "1024,exact",
        "--trials",
        "16",
        "--seed",
        "7",
    ]
    outputs = []
    for name, workers in (("a.csv", 1), ("b.csv", 1), ("c.csv", 8)):
        out = tmp_path / name
        rc = cli_main(args + ["--workers", str(workers), "--out", str(out)])
        assert rc == 0
        outputs.append(out.read_bytes())
    ok = outputs[0] == outputs[1] == outputs[2]
    _check(9, "seeded CSV determinism across workers", ok, f"{len(outputs[0])} bytes")
