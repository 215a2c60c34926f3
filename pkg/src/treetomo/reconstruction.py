"""Recursive relative-phase reconstruction of a pure state.

Amplitudes come from the canonical basis (c_k = sqrt(f_k)). Each internal
node m then joins its two known children by a single relative phase phi,
recovered from measured projector probabilities via the rows

    p_tilde_j = (p_j - |<alpha_j|psi_a>|^2 - |<beta_j|psi_b>|^2) / 2
    Gamma_j   = <psi_a|alpha_j> <beta_j|psi_b>

which constrain Re[Gamma_j e^{i phi}] = p_tilde_j. With two or more
well-conditioned rows the phase is a small real least-squares problem; when
every row pair is degenerate (Im[Gamma_j Gamma_k^*] ~ 0) a single row still
pins the phase up to a two-fold ambiguity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .bases import KIND_CANONICAL, OrthonormalBasis
from .measurement import ProbabilityVector
from .states import PureState, fix_global_phase, state_to_dict
from .tree import TreeLayout

STATUS_OK = "ok"
STATUS_AMBIGUOUS = "ambiguous"
STATUS_FALLBACK = "degenerate-fallback"

GAMMA_FLOOR = 1e-14
NULL_CHILD_TOL = 1e-9
DEFAULT_DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class NodeEstimate:
    """Unnormalized subspace vector for one tree node, stored dense in C^d."""

    node: int
    vector: np.ndarray


@dataclass(frozen=True)
class PhaseSolution:
    phase: complex
    status: str
    candidates: tuple
    residual: float
    degeneracy_metric: float
    clamped: bool = False


@dataclass(frozen=True)
class NodeDiagnostics:
    node: int
    status: str
    residual: float
    degeneracy_metric: float


@dataclass(frozen=True)
class ReconstructionReport:
    state: PureState
    nodes: tuple  # NodeDiagnostics per internal node, root last
    lambda_hat: float | None = None
    lambda_per_node: tuple = ()
    clamped_amplitudes: int = 0

    def statuses(self) -> dict:
        return {n.node: n.status for n in self.nodes}

    def flagged_nodes(self) -> list:
        return [n.node for n in self.nodes if n.status != STATUS_OK]

    def to_dict(self) -> dict:
        out = {
            "state": state_to_dict(self.state),
            "nodes": [
                {
                    "m": n.node,
                    "status": n.status,
                    "residual": n.residual,
                    "degeneracy_metric": n.degeneracy_metric,
                }
                for n in self.nodes
            ],
        }
        if self.lambda_hat is not None:
            out["lambda_hat"] = self.lambda_hat
            out["lambda_per_node"] = [
                {"m": m, "lambda_abs": la, "lambda_hat": lh} for m, la, lh in self.lambda_per_node
            ]
            out["clamped_amplitudes"] = self.clamped_amplitudes
        return out


def save_report(path: str, report: ReconstructionReport) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)


def amplitudes_from_canonical(f: ProbabilityVector, t: TreeLayout) -> dict:
    """Leaf estimates c_k |k> with c_k = sqrt(f_k); keys are leaf node indices."""
    c = np.sqrt(f.probs)
    leaves = {}
    for m in t.leaves:
        vec = np.zeros(t.dim, dtype=np.complex128)
        vec[m - t.dim] = c[m - t.dim]
        leaves[m] = NodeEstimate(m, vec)
    return leaves


def gamma_ptilde(alpha_est, beta_est, projector: np.ndarray, p_measured: float):
    """One phase-system row from a measured projector probability.

    `alpha_est` and `beta_est` are the child vectors embedded in C^d with
    disjoint supports, so plain inner products against the full projector
    pick out the alpha and beta parts.
    """
    a_vec = alpha_est.vector if isinstance(alpha_est, NodeEstimate) else alpha_est
    b_vec = beta_est.vector if isinstance(beta_est, NodeEstimate) else beta_est
    a_inner = np.vdot(projector, a_vec)  # <alpha_j|psi_a>
    b_inner = np.vdot(projector, b_vec)  # <beta_j|psi_b>
    gamma = np.conj(a_inner) * b_inner
    p_tilde = (p_measured - abs(a_inner) ** 2 - abs(b_inner) ** 2) / 2.0
    return gamma, p_tilde


def two_projector_phase(row1, row2) -> complex:
    """Closed-form phase from two independent rows (2x2 elimination)."""
    g1, p1 = row1
    g2, p2 = row2
    denom = (g1 * np.conj(g2)).imag
    return 1j * (p2 * np.conj(g1) - p1 * np.conj(g2)) / denom


def solve_phase(rows, tol_degenerate: float = DEFAULT_DEGENERACY_TOL) -> PhaseSolution:
    """Solve Re[Gamma_j e^{i phi}] = p_tilde_j for the unit complex e^{i phi}."""
    if not rows:
        raise ValueError("phase system needs at least one row")
    usable = [(complex(g), float(p)) for g, p in rows if abs(g) > GAMMA_FLOOR]
    if not usable:
        return PhaseSolution(1.0 + 0.0j, STATUS_FALLBACK, (1.0 + 0.0j,), 0.0, 0.0)

    metric = 0.0
    non_degenerate = False
    if len(usable) >= 2:
        for j in range(len(usable)):
            for k in range(j + 1, len(usable)):
                gj, gk = usable[j][0], usable[k][0]
                pair = abs((gj * np.conj(gk)).imag)
                metric = max(metric, pair)
                if pair > tol_degenerate * abs(gj) * abs(gk):
                    non_degenerate = True

    if non_degenerate:
        mat = np.array([[g.real, -g.imag] for g, _ in usable])
        rhs = np.array([p for _, p in usable])
        normal = mat.T @ mat
        x = np.linalg.solve(normal, mat.T @ rhs)
        scale = math.hypot(x[0], x[1])
        if scale > 1e-15:
            phase = _polish_on_circle(complex(x[0], x[1]) / scale, usable)
            residual = _residual(usable, phase)
            return PhaseSolution(phase, STATUS_OK, (phase,), residual, metric)
        # all p_tilde consistent with zero: no direction information, fall through

    # Every usable pair is degenerate: one row plus |e^{i phi}| = 1 leaves
    # two candidates e^{i phi +-} = (p +- i sqrt(|G|^2 - p^2)) / G.
    g, p = max(usable, key=lambda row: abs(row[0]))
    disc = abs(g) ** 2 - p**2
    clamped = disc < 0.0
    root = math.sqrt(max(disc, 0.0))
    cands = []
    for c in ((p + 1j * root) / g, (p - 1j * root) / g):
        cands.append(c / abs(c))
    res = [_residual(usable, c) for c in cands]
    if abs(res[0] - res[1]) > 1e-15 * (1.0 + max(res)):
        pick = int(np.argmin(res))
    else:
        pick = int(np.argmax([c.real for c in cands]))
    return PhaseSolution(cands[pick], STATUS_AMBIGUOUS, tuple(cands), res[pick], metric, clamped)


def _residual(rows, phase) -> float:
    return math.sqrt(sum(((g * phase).real - p) ** 2 for g, p in rows))


def _polish_on_circle(phase: complex, rows, max_iter: int = 30) -> complex:
    """Newton refinement of sum_j (Re[Gamma_j e^{i theta}] - p_j)^2 over theta.

    Normalizing the unconstrained least-squares 2-vector is only a projection
    onto the unit circle; with noisy, ill-conditioned rows the constrained
    minimum can sit noticeably elsewhere. Starting from the projected point
    keeps the right basin, and on consistent rows the step is zero.
    """
    theta = math.atan2(phase.imag, phase.real)
    for _ in range(max_iter):
        e = complex(math.cos(theta), math.sin(theta))
        d1 = 0.0
        d2 = 0.0
        for g, p in rows:
            u = (g * e).real
            du = -(g * e).imag
            d1 += 2.0 * (u - p) * du
            d2 += 2.0 * du * du - 2.0 * (u - p) * u
        if d2 <= 0.0:
            break
        step = max(-0.5, min(0.5, d1 / d2))
        theta -= step
        if abs(step) < 1e-13:
            break
    return complex(math.cos(theta), math.sin(theta))


def _validate_inputs(t: TreeLayout, bases, freqs):
    if len(bases) != len(freqs):
        raise ValueError("need one frequency vector per basis")
    if not bases or bases[0].kind != KIND_CANONICAL:
        raise ValueError("first basis must be canonical")
    if len(bases) < 3 and t.dim > 1:
        raise ValueError("reconstruction needs the canonical basis plus at least two more")
    for b, f in zip(bases, freqs):
        if b.dim != t.dim or f.dim != t.dim:
            raise ValueError("dimension mismatch between tree, basis, and frequencies")
    for b in bases[1:]:
        for m in t.internal_nodes:
            if m not in b.node_map:
                raise ValueError(f"basis of kind {b.kind!r} has no projector for node {m}")
            vec = b.vectors[b.node_map[m]]
            mask = np.ones(t.dim, dtype=bool)
            mask[t.support_indices(m)] = False
            if np.any(np.abs(vec[mask]) > 1e-10):
                raise ValueError(f"projector for node {m} leaks outside its support")


def reconstruct(
    t: TreeLayout,
    bases,
    freqs,
    tol_degenerate: float = DEFAULT_DEGENERACY_TOL,
    validate: bool = True,
    shots=None,
) -> ReconstructionReport:
    """Bottom-up reconstruction from per-basis outcome frequencies.

    `bases[0]` must be the canonical basis; every other basis contributes one
    projector row per internal node through its node_map. When the finite
    `shots` count is given, rows are rescaled by the inverse standard
    deviation of their measured probability (a positive rescale leaves the
    phase equation invariant but evens out the noise across rows).
    """
    if validate:
        _validate_inputs(t, bases, freqs)
    est = {m: e.vector for m, e in amplitudes_from_canonical(freqs[0], t).items()}
    diagnostics = []
    for m in range(t.dim - 1, 0, -1):
        left, right = est[2 * m], est[2 * m + 1]
        if np.linalg.norm(left) < NULL_CHILD_TOL or np.linalg.norm(right) < NULL_CHILD_TOL:
            est[m] = left + right
            diagnostics.append(NodeDiagnostics(m, STATUS_FALLBACK, 0.0, 0.0))
            continue
        rows = []
        for b, f in zip(bases[1:], freqs[1:]):
            j = b.node_map[m]
            g, p = gamma_ptilde(left, right, b.vectors[j], f.probs[j])
            if shots is not None:
                pj = f.probs[j]
                w = 1.0 / math.sqrt(max(pj * (1.0 - pj), 1.0 / int(shots)))
                g, p = g * w, p * w
            rows.append((g, p))
        sol = solve_phase(rows, tol_degenerate)
        est[m] = left + sol.phase * right
        diagnostics.append(NodeDiagnostics(m, sol.status, sol.residual, sol.degeneracy_metric))
    vec = est[1]
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        raise ValueError("reconstructed vector has zero norm")
    state = PureState(fix_global_phase(vec / norm))
    return ReconstructionReport(state, tuple(diagnostics))


def make_degenerate_state(t: TreeLayout, bases, m: int, seed) -> PureState:
    """Engineer a state whose node-m phase system degenerates for these bases.

    The left-child component is drawn orthogonal to the first basis's alpha
    part at node m, forcing Gamma_1 = 0 there; everything else is Haar-random.
    """
    if t.is_leaf(m):
        raise ValueError(f"node {m} is a leaf; only internal nodes can degenerate")
    non_canonical = [b for b in bases if b.kind != KIND_CANONICAL]
    if len(non_canonical) < 2:
        raise ValueError("need at least two non-canonical bases")
    first = non_canonical[0]
    alpha = first.vectors[first.node_map[m]].copy()
    left_idx = t.support_indices(2 * m)
    alpha_part = alpha[left_idx]
    rng = np.random.default_rng(seed)
    for _ in range(64):
        vec = rng.standard_normal(t.dim) + 1j * rng.standard_normal(t.dim)
        sub = vec[left_idx]
        a_norm2 = np.vdot(alpha_part, alpha_part).real
        if a_norm2 > 0.0:
            sub = sub - (np.vdot(alpha_part, sub) / a_norm2) * alpha_part
        if np.linalg.norm(sub) < 1e-10:
            if left_idx.size == 1:
                raise ValueError(
                    f"node {m}: one-dimensional left child fully covered by the "
                    "projector; cannot degenerate without a null amplitude"
                )
            continue
        vec[left_idx] = sub
        vec /= np.linalg.norm(vec)
        return PureState(fix_global_phase(vec))
    raise ValueError(f"could not engineer a degenerate state at node {m}")
