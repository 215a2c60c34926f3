"""Born-rule probabilities, finite-shot multinomial sampling, and frequencies."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .bases import OrthonormalBasis
from .states import NoisyState, PureState

EXACT = "exact"


@dataclass(frozen=True)
class ProbabilityVector:
    basis_id: str
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if np.any(probs < -1e-12) or np.any(~np.isfinite(probs)):
            raise ValueError("probabilities must be finite and non-negative")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, expected 1")
        object.__setattr__(self, "probs", np.maximum(probs, 0.0))

    @property
    def dim(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class OutcomeCounts:
    """Per-basis outcome histogram; shots == EXACT stores Born probabilities."""

    basis_id: str
    counts: np.ndarray
    shots: object  # positive int or EXACT

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.float64)
        object.__setattr__(self, "counts", counts)
        if self.shots != EXACT:
            if int(self.shots) < 1:
                raise ValueError("shots must be >= 1")
            if abs(counts.sum() - int(self.shots)) > 1e-9:
                raise ValueError("counts do not sum to shots")


def born_probabilities(state, basis: OrthonormalBasis) -> ProbabilityVector:
    """Outcome probabilities p_j = (1-lambda)|<b_j|psi>|^2 + lambda/d."""
    if isinstance(state, PureState):
        state = NoisyState(state, 0.0)
    if state.dim != basis.dim:
        raise ValueError(f"dimension mismatch: state {state.dim}, basis {basis.dim}")
    overlaps = basis.vectors.conj() @ state.pure.amplitudes
    probs = (1.0 - state.lam) * np.abs(overlaps) ** 2 + state.lam / state.dim
    probs /= probs.sum()
    return ProbabilityVector(basis.kind, probs)


def sample_counts(p: ProbabilityVector, shots: int, seed) -> OutcomeCounts:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, p.probs / p.probs.sum())
    return OutcomeCounts(p.basis_id, counts, int(shots))


def exact_counts(p: ProbabilityVector) -> OutcomeCounts:
    """Infinite-shot sentinel: counts carry the Born probabilities themselves."""
    return OutcomeCounts(p.basis_id, p.probs, EXACT)


def frequencies(c: OutcomeCounts) -> ProbabilityVector:
    if c.shots == EXACT:
        return ProbabilityVector(c.basis_id, c.counts)
    return ProbabilityVector(c.basis_id, c.counts / int(c.shots))


def measure(state, basis: OrthonormalBasis, shots, seed=None) -> ProbabilityVector:
    """Born probabilities for shots == EXACT, otherwise sampled frequencies."""
    p = born_probabilities(state, basis)
    if shots == EXACT:
        return p
    return frequencies(sample_counts(p, shots, seed))


def counts_to_dict(c: OutcomeCounts) -> dict:
    if c.shots == EXACT:
        return {"basis": c.basis_id, "shots": EXACT, "counts": [float(x) for x in c.counts]}
    return {"basis": c.basis_id, "shots": int(c.shots), "counts": [int(x) for x in c.counts]}


def counts_from_dict(data: dict) -> OutcomeCounts:
    shots = data["shots"]
    return OutcomeCounts(data["basis"], np.asarray(data["counts"], dtype=np.float64), shots)


def save_counts(path: str, c: OutcomeCounts) -> None:
    with open(path, "w") as fh:
        json.dump(counts_to_dict(c), fh)


def load_counts(path: str) -> OutcomeCounts:
    with open(path) as fh:
        return counts_from_dict(json.load(fh))
