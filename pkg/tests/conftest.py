import math

import numpy as np
import pytest

import treetomo as tt


def seeded_tree_bases(tree, n_non_canonical, seed):
    """Canonical basis plus n tree bases with a = b = 1/sqrt(2) and random phi."""
    rng = np.random.default_rng(seed)
    inv = 1.0 / math.sqrt(2.0)
    bases = [tt.canonical_basis(tree.dim)]
    for phi in rng.uniform(0.0, 2.0 * math.pi, n_non_canonical):
        bases.append(tt.tree_basis(tree, tt.TreeBasisParams(inv, inv, float(phi))))
    return bases


def exact_freqs(state, bases):
    return [tt.measure(state, b, tt.EXACT) for b in bases]


@pytest.fixture
def tree5():
    return tt.build_tree(5)
