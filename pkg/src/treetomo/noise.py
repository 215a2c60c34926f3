"""White-noise mixture estimation and noise-corrected reconstruction.

Internal nodes whose children are both leaves see projectors of the form
u|k> + v|k+1>. Removing the known canonical contributions from each measured
probability leaves a linear system for the complex quantity

    Lambda = 2 (1 - lambda) c_k c_{k+1} e^{i(phi_{k+1} - phi_k)},

whose modulus together with p_k and p_{k+1} pins down lambda through a
quadratic (the smaller root, since lambda is small). With lambda in hand all
measured probabilities can be unmixed, p -> (p - lambda/d) / (1 - lambda),
and the noiseless reconstruction re-run on the corrected frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bases import KIND_CANONICAL
from .measurement import ProbabilityVector
from .reconstruction import ReconstructionReport, reconstruct
from .tree import TreeLayout

MIN_WEIGHT = 1e-12
MIN_SINGULAR = 1e-8


@dataclass(frozen=True)
class NodeLambdaEstimate:
    node: int
    lambda_abs: float  # |Lambda| = 2 (1 - lambda) c_k c_{k+1}
    lambda_hat: float


@dataclass(frozen=True)
class LambdaEstimate:
    lambda_hat: float
    per_node: tuple
    spread: float  # interquartile range of the per-node estimates


def solve_unnormalized_node(rows) -> complex:
    """Least-squares solve of [cos phi_j, sin phi_j] x = P_j without normalization."""
    if len(rows) < 2:
        raise ValueError("need at least two projector rows")
    mat = np.array([[math.cos(phi), math.sin(phi)] for phi, _ in rows])
    rhs = np.array([p for _, p in rows])
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[-1] < MIN_SINGULAR:
        raise ValueError("projector phases are degenerate mod pi")
    x, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    return complex(x[0], x[1])


def estimate_lambda_node(p_k: float, p_k1: float, lambda_abs: float, d: int) -> float:
    """Smaller root of |Lambda|^2 = 4 (p_k - l/d)(p_{k+1} - l/d), clamped to [0, 1]."""
    disc = max((p_k - p_k1) ** 2 + lambda_abs**2, 0.0)
    lam = (d / 2.0) * (p_k + p_k1 - math.sqrt(disc))
    return min(1.0, max(0.0, lam))


def _node_rows(t, m, bases, freqs, p_canonical):
    k_idx = t.support_indices(2 * m)[0]  # 0-based label of the left leaf
    rows = []
    for b, f in zip(bases, freqs):
        if b.kind == KIND_CANONICAL:
            continue
        j = b.node_map[m]
        u, v = b.vectors[j][k_idx], b.vectors[j][k_idx + 1]
        weight = abs(u) * abs(v)
        if weight < MIN_WEIGHT:
            continue
        phi = np.angle(v) - np.angle(u)
        p_tilde = (
            f.probs[j] - p_canonical[k_idx] * abs(u) ** 2 - p_canonical[k_idx + 1] * abs(v) ** 2
        ) / weight
        rows.append((float(phi), float(p_tilde)))
    return int(k_idx), rows


def estimate_lambda(t: TreeLayout, bases, freqs) -> LambdaEstimate:
    """Median per-node mixture estimate over all two-leaf internal nodes."""
    if not bases or bases[0].kind != KIND_CANONICAL:
        raise ValueError("first basis must be canonical")
    p_canonical = freqs[0].probs
    per_node = []
    for m in t.internal_nodes:
        if 2 * m < t.dim:  # children must both be leaves
            continue
        k_idx, rows = _node_rows(t, m, bases, freqs, p_canonical)
        if len(rows) < 2:
            continue
        try:
            lam_c = solve_unnormalized_node(rows)
        except ValueError:
            continue
        lam_abs = abs(lam_c)
        lam_hat = estimate_lambda_node(p_canonical[k_idx], p_canonical[k_idx + 1], lam_abs, t.dim)
        per_node.append(NodeLambdaEstimate(m, lam_abs, lam_hat))
    if not per_node:
        raise ValueError("no usable two-leaf node; cannot estimate lambda")
    values = np.array([e.lambda_hat for e in per_node])
    spread = float(np.quantile(values, 0.75) - np.quantile(values, 0.25))
    return LambdaEstimate(float(np.median(values)), tuple(per_node), spread)


def correct_amplitudes(f: ProbabilityVector, lambda_hat: float, d: int):
    """Invert the white-noise mixing of canonical frequencies.

    Returns (corrected moduli c_k, number of entries clamped at zero).
    """
    if not 0.0 <= lambda_hat < 1.0:
        raise ValueError("lambda_hat must lie in [0, 1); lambda = 1 has no pure part")
    c2 = (f.probs - lambda_hat / d) / (1.0 - lambda_hat)
    clamped = int(np.sum(c2 < 0.0))
    c2 = np.maximum(c2, 0.0)
    total = c2.sum()
    if total <= 0.0:
        raise ValueError("all corrected amplitudes vanished")
    return np.sqrt(c2 / total), clamped


def correct_frequencies(f: ProbabilityVector, lambda_hat: float, d: int) -> ProbabilityVector:
    """Unmix any measured probability vector: p -> (p - lambda/d) / (1 - lambda)."""
    if not 0.0 <= lambda_hat < 1.0:
        raise ValueError("lambda_hat must lie in [0, 1)")
    probs = np.maximum((f.probs - lambda_hat / d) / (1.0 - lambda_hat), 0.0)
    total = probs.sum()
    if total <= 0.0:
        raise ValueError("all corrected probabilities vanished")
    return ProbabilityVector(f.basis_id, probs / total)


def reconstruct_noise_corrected(
    t: TreeLayout, bases, freqs, tol_degenerate: float = 1e-10, shots=None
) -> ReconstructionReport:
    """Estimate lambda, unmix every frequency vector, then reconstruct.

    Phases are re-solved from the corrected probabilities rather than reused
    from the raw pipeline: the raw p_tilde rows at multi-leaf nodes carry an
    O(lambda) bias that the amplitude correction alone would not remove.
    """
    lam_est = estimate_lambda(t, bases, freqs)
    if lam_est.lambda_hat >= 1.0 - 1e-9:
        raise ValueError("estimated lambda ~ 1; no pure component to reconstruct")
    _, clamped = correct_amplitudes(freqs[0], lam_est.lambda_hat, t.dim)
    corrected = [correct_frequencies(f, lam_est.lambda_hat, t.dim) for f in freqs]
    report = reconstruct(t, bases, corrected, tol_degenerate, shots=shots)
    return ReconstructionReport(
        state=report.state,
        nodes=report.nodes,
        lambda_hat=lam_est.lambda_hat,
        lambda_per_node=tuple(
            (e.node, e.lambda_abs, e.lambda_hat) for e in lam_est.per_node
        ),
        clamped_amplitudes=clamped,
    )
