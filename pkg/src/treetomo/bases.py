"""Measurement bases: canonical, tree-structured, and random-subspace.

A tree-structured basis is built bottom-up from the heap layout. Each leaf m
holds the canonical vector |m-d+1>, and each internal node m holds the pair

    r_m = a s_{2m} + b e^{i phi} s_{2m+1}
    s_m = b s_{2m} - a e^{i phi} s_{2m+1}

with a^2 + b^2 = 1. The d-1 vectors r_m are mutually orthogonal and s_1
completes the basis. Note the e^{+i phi} in s_m: with e^{-i phi} the pair
(r_m, s_m) would not be orthogonal for generic phi.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .tree import TreeLayout

KIND_CANONICAL = "canonical"
KIND_TREE = "tree"
KIND_RANDOM = "random-subspace"

GRAM_TOL = 1e-10


@dataclass(frozen=True)
class TreeBasisParams:
    a: float
    b: float
    phi: float

    def __post_init__(self):
        if abs(self.a**2 + self.b**2 - 1.0) > 1e-12:
            raise ValueError("tree basis parameters must satisfy a^2 + b^2 = 1")


@dataclass(frozen=True)
class OrthonormalBasis:
    """d orthonormal vectors (rows of `vectors`) with an internal-node map.

    node_map sends internal node m to the row index of the vector measured
    for that node; empty for the canonical basis.
    """

    vectors: np.ndarray
    node_map: dict
    kind: str
    params: TreeBasisParams | None = None

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def max_gram_deviation(self) -> float:
        gram = self.vectors @ self.vectors.conj().T
        return float(np.max(np.abs(gram - np.eye(self.dim))))


def canonical_basis(d: int) -> OrthonormalBasis:
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return OrthonormalBasis(np.eye(d, dtype=np.complex128), {}, KIND_CANONICAL)


def tree_basis(t: TreeLayout, p: TreeBasisParams) -> OrthonormalBasis:
    d = t.dim
    phase = np.exp(1j * p.phi)
    s = [None] * (2 * d)
    for m in t.leaves:
        vec = np.zeros(d, dtype=np.complex128)
        vec[m - d] = 1.0
        s[m] = vec
    r = [None] * d
    for m in range(d - 1, 0, -1):
        r[m] = p.a * s[2 * m] + p.b * phase * s[2 * m + 1]
        s[m] = p.b * s[2 * m] - p.a * phase * s[2 * m + 1]
    if d == 1:
        return OrthonormalBasis(np.eye(1, dtype=np.complex128), {}, KIND_TREE, p)
    vectors = np.vstack(r[1:] + [s[1]])
    node_map = {m: m - 1 for m in t.internal_nodes}
    return OrthonormalBasis(vectors, node_map, KIND_TREE, p)


def random_subspace_basis(t: TreeLayout, seed) -> OrthonormalBasis:
    """One Haar-random vector per internal node, orthogonalized children-first.

    Nodes are processed in descending heap index so each vector is only ever
    orthogonalized against vectors living in descendant or disjoint supports,
    which keeps it supported exactly on its own node. A completion vector
    orthogonal to all of them closes the basis.
    """
    d = t.dim
    if d < 2:
        raise ValueError(f"random-subspace basis requires d >= 2, got {d}")
    root = np.random.SeedSequence(seed) if not isinstance(seed, np.random.SeedSequence) else seed
    node_seeds = root.spawn(d)
    accepted: list[np.ndarray] = []
    by_node: dict[int, np.ndarray] = {}
    for m in range(d - 1, 0, -1):
        idx = t.support_indices(m)
        rng = np.random.default_rng(node_seeds[m - 1])
        by_node[m] = _draw_orthogonal(rng, d, idx, accepted)
        accepted.append(by_node[m])
    rng = np.random.default_rng(node_seeds[d - 1])
    completion = _draw_orthogonal(rng, d, np.arange(d), accepted)
    vectors = np.vstack([by_node[m] for m in t.internal_nodes] + [completion])
    node_map = {m: m - 1 for m in t.internal_nodes}
    return OrthonormalBasis(vectors, node_map, KIND_RANDOM)


def _draw_orthogonal(rng, d, idx, accepted, min_norm=1e-8):
    """Draw a random unit vector on `idx`, orthogonal to all accepted vectors."""
    while True:
        vec = np.zeros(d, dtype=np.complex128)
        vec[idx] = rng.standard_normal(idx.size) + 1j * rng.standard_normal(idx.size)
        for _ in range(2):  # second pass cleans up classical Gram-Schmidt residue
            for prev in accepted:
                vec -= np.vdot(prev, vec) * prev
        norm = np.linalg.norm(vec)
        if norm > min_norm:
            return vec / norm


def basis_to_dict(b: OrthonormalBasis) -> dict:
    params = None
    if b.params is not None:
        params = {"a": b.params.a, "b": b.params.b, "phi": b.params.phi}
    return {
        "dim": b.dim,
        "kind": b.kind,
        "params": params,
        "vectors": [[[float(z.real), float(z.imag)] for z in row] for row in b.vectors],
        "node_map": {str(m): int(j) for m, j in b.node_map.items()},
    }


def basis_from_dict(data: dict) -> OrthonormalBasis:
    vectors = np.array(
        [[complex(re, im) for re, im in row] for row in data["vectors"]],
        dtype=np.complex128,
    )
    params = None
    if data.get("params"):
        p = data["params"]
        params = TreeBasisParams(p["a"], p["b"], p["phi"])
    node_map = {int(m): int(j) for m, j in data["node_map"].items()}
    return OrthonormalBasis(vectors, node_map, data["kind"], params)


def save_basis(path: str, b: OrthonormalBasis) -> None:
    with open(path, "w") as fh:
        json.dump(basis_to_dict(b), fh)


def load_basis(path: str) -> OrthonormalBasis:
    with open(path) as fh:
        return basis_from_dict(json.load(fh))
