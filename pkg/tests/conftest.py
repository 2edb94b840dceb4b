import numpy as np
import pytest

from dactk import kernels
from dactk.codec import AMBIGUOUS, advance, classify, initial_state

BACKENDS = kernels.available_backends()


@pytest.fixture(params=BACKENDS)
def backend(request):
    """Each kernel implementation in turn; both must behave identically."""
    return kernels.get_backend(request.param)


def dfs_levels(codeword, depth):
    """Reference tree walk built only on the scalar codec operations.

    Returns (counts, prefixes): exact per-level populations and the set
    of path prefixes at each level.  Recursive depth-first, so slow and
    structurally independent of the breadth-first array kernels.
    """
    params = codeword.params
    counts = [0] * (depth + 1)
    prefixes = [set() for _ in range(depth + 1)]

    def walk(state, d):
        counts[d] += 1
        prefixes[d].add(state.prefix)
        if d == depth:
            return
        c = classify(state, params)
        for s in ((0, 1) if c == AMBIGUOUS else (c,)):
            walk(advance(state, s, codeword, params), d + 1)

    walk(initial_state(codeword), 0)
    return counts, prefixes


def random_bits(rng, n):
    return rng.integers(0, 2, size=n, dtype=np.uint8)
