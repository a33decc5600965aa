"""Shared random-instance builders for the test suite."""

import numpy as np

from qdescent.poly import Point, TensorDecomposition, UnitaryFactor


def random_symmetric_unitary(rng, n):
    """A random real symmetric orthogonal matrix (reflection through a random subspace)."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    signs = rng.choice([-1.0, 1.0], size=n)
    return q @ np.diag(signs) @ q.T


def random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_decomposition(rng, dims=(2, 4), p_max=3, k_max=3, symmetric=True):
    """A random desk-scale decomposition with real factors."""
    n = int(rng.choice(dims))
    p = int(rng.integers(1, p_max + 1))
    k = int(rng.integers(1, k_max + 1))
    maker = random_symmetric_unitary if symmetric else random_orthogonal
    terms = [[UnitaryFactor(maker(rng, n)) for _ in range(p)] for _ in range(k)]
    prefactor = float(rng.uniform(0.3, 1.5) * rng.choice([-1.0, 1.0]))
    return TensorDecomposition(dim=n, order_p=p, terms=terms, prefactor=prefactor)


def random_point(rng, n):
    return Point.normalized(rng.standard_normal(n))


def aligned(vec, reference):
    """Flip vec so it has nonnegative inner product with reference."""
    return vec if float(vec @ reference) >= 0 else -vec
