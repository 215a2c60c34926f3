"""Pure state vectors, Haar sampling, white-noise mixtures, and fidelity metrics."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-12
FILE_NORM_TOL = 1e-6


def fix_global_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate `vec` so its largest-modulus entry is real and non-negative."""
    k = int(np.argmax(np.abs(vec)))
    pivot = vec[k]
    if abs(pivot) == 0.0:
        return vec.copy()
    return vec * (np.conj(pivot) / abs(pivot))


@dataclass(frozen=True)
class PureState:
    """Unit-norm complex amplitude vector in a d-dimensional Hilbert space."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.size < 1:
            raise ValueError("amplitudes must be a non-empty 1-d vector")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 by more than {NORM_TOL}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def canonical(self) -> "PureState":
        """Copy with the global-phase convention applied."""
        return PureState(fix_global_phase(self.amplitudes))


@dataclass(frozen=True)
class NoisyState:
    """Pure state mixed with the maximally mixed state by a parameter lambda.

    lambda = 0 reproduces the pure state; the density matrix
    (1-lambda)|psi><psi| + (lambda/d) I is never materialized.
    """

    pure: PureState
    lam: float

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")

    @property
    def dim(self) -> int:
        return self.pure.dim


def haar_random_state(d: int, seed) -> PureState:
    """Sample a Haar-uniform pure state of dimension d, deterministic per seed.

    Real and imaginary parts are 2d independent standard normals; normalizing
    the resulting complex vector gives the Haar measure on pure states.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    vec /= np.linalg.norm(vec)
    return PureState(fix_global_phase(vec))


def infidelity(a: PureState, b: PureState) -> float:
    """1 - |<a|b>|^2, invariant under global phases of either argument."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} != {b.dim}")
    overlap = np.vdot(a.amplitudes, b.amplitudes)
    return float(min(1.0, max(0.0, 1.0 - abs(overlap) ** 2)))


def state_to_dict(s: PureState) -> dict:
    return {
        "dim": s.dim,
        "amplitudes": [[float(z.real), float(z.imag)] for z in s.amplitudes],
    }


def state_from_dict(data: dict, renormalize: bool = False) -> PureState:
    amps = np.array([complex(re, im) for re, im in data["amplitudes"]])
    if amps.size != int(data["dim"]):
        raise ValueError("amplitude count does not match declared dimension")
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > FILE_NORM_TOL:
        if not renormalize:
            raise ValueError(
                f"state file norm error {abs(norm - 1.0):.3g} exceeds {FILE_NORM_TOL}; "
                "pass renormalize to accept"
            )
    if norm == 0.0:
        raise ValueError("zero state vector")
    return PureState(amps / norm)


def save_state(path: str, s: PureState) -> None:
    with open(path, "w") as fh:
        json.dump(state_to_dict(s), fh)


def load_state(path: str, renormalize: bool = False) -> PureState:
    with open(path) as fh:
        return state_from_dict(json.load(fh), renormalize=renormalize)
