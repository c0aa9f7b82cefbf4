"""Random generators and independent oracles shared by the test modules."""

import random
from fractions import Fraction

import sympy as sp

from airyideals.heisenberg import CONJ, ModePolynomial, ZeroModeScenario
from airyideals.weyl import AlgebraConfig, WeylOperator

h = sp.Symbol("h")


def xsym(i):
    return sp.Symbol(f"x{i}")


def rand_q(rng, lo=-3, hi=3):
    c = 0
    while c == 0:
        c = Fraction(rng.randint(lo, hi), rng.choice([1, 1, 2, 3]))
    return c


def random_key(rng, budget, indices, config):
    """Random ``(xs, ds)`` with Bernstein degree ≤ budget respecting index roles."""
    xs, ds = {}, {}
    for _ in range(rng.randint(0, budget)):
        i = rng.choice(indices)
        if i in config.derivative_only:
            side = ds
        elif i in config.variable_only:
            side = xs
        else:
            side = rng.choice([xs, ds])
        side[i] = side.get(i, 0) + 1
    return tuple(sorted(xs.items())), tuple(sorted(ds.items()))


def random_weyl(rng, K=4, indices=(1, 2, 3), config=None, nterms=4, min_order=0):
    config = config or AlgebraConfig()
    terms = {}
    for _ in range(nterms):
        n = rng.randint(min_order, K)
        key = random_key(rng, n, list(indices), config)
        part = terms.setdefault(n, {})
        part[key] = part.get(key, 0) + rand_q(rng)
    return WeylOperator(terms, K, config)


def random_modes(rng, K=3, N=3, scenario=ZeroModeScenario.RHO, window=3, nterms=4):
    terms = {}
    pool = list(range(-window, window + 1)) + [CONJ]
    for _ in range(nterms):
        d = rng.randint(0, K)
        mono = tuple(rng.choice(pool) for _ in range(d))
        n = rng.randint(d, K)
        part = terms.setdefault(n, {})
        part[mono] = part.get(mono, 0) + rand_q(rng)
    return ModePolynomial(terms, K, N, scenario)


def sym_apply(P, f):
    """Apply a Weyl operator to a sympy expression by differentiation."""
    out = 0
    for n, (xs, ds), c in P.items():
        g = f
        for i, e in ds:
            g = sp.diff(g, xsym(i), e)
        for i, e in xs:
            g = g * xsym(i) ** e
        out += sp.Rational(c.numerator, c.denominator) * h ** n * g
    return sp.expand(out)


def truncate_h(expr, K):
    expr = sp.expand(expr)
    return sp.expand(sum(expr.coeff(h, n) * h ** n for n in range(K + 1)))


def random_test_poly(rng, indices=(1, 2, 3), degree=4, nterms=5):
    f = 0
    for _ in range(nterms):
        m = 1
        for _ in range(rng.randint(0, degree)):
            m *= xsym(rng.choice(indices))
        f += rng.randint(-4, 4) * m
    return sp.expand(f)


def seeded(n, base=0):
    return [random.Random(base + i) for i in range(n)]
