"""Random smooth fields shared by the property tests and the acceptance run."""

import numpy as np

from anisoeq.fields import VectorField, polynomial


def _monomials(vars_, degree):
    out = []
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            for k in range(degree + 1 - i - j):
                e = [0, 0, 0]
                for v, d in zip(vars_, (i, j, k)):
                    e[v] += d
                out.append(tuple(e))
    return sorted(set(out))


def random_polynomial(rng, vars_=(0, 1, 2), degree=3, amplitude=0.5, offset=0.0):
    terms = {m: amplitude * rng.uniform(-1, 1) for m in _monomials(vars_, degree)}
    terms[(0, 0, 0)] = terms.get((0, 0, 0), 0.0) + offset
    return polynomial(terms)


def random_vector(rng, degree=3):
    return VectorField.from_components(*(random_polynomial(rng, degree=degree) for _ in range(3)))


def random_solenoidal(rng, degree=3):
    """Each component is independent of its own coordinate, so div B = 0."""
    bx = random_polynomial(rng, (1, 2), degree, 0.3)
    by = random_polynomial(rng, (0, 2), degree, 0.3)
    bz = random_polynomial(rng, (0, 1), degree, 0.3, offset=2.0)
    return VectorField.from_components(bx, by, bz)
