from fractions import Fraction

import pytest
import sympy as sp
from helpers import (h, random_test_poly, random_weyl, seeded, sym_apply, truncate_h, xsym)

from airyideals.weyl import (NEG_INF, AlgebraConfig, ExponentData, ExponentialAction,
                             Transvection, WeylOperator, WindowError, act_on_exponential,
                             apply_transvection, bernstein_degree, commutator, multiply,
                             operator_from_records, operator_to_records)


def op(terms, K=4, config=None):
    return WeylOperator(terms, K, config)


def test_rees_condition_enforced():
    with pytest.raises(ValueError):
        op({1: {(((1, 1),), ((1, 1),)): 1}})


def test_basic_products():
    d1 = WeylOperator.hd(1, 4)
    x1 = WeylOperator.hx(1, 4)
    assert d1 * x1 == op({2: {(((1, 1),), ((1, 1),)): 1, ((), ()): 1}})
    C = commutator(d1, WeylOperator.hd(2, 4) + op({2: {(((1, 1),), ()): 1}}))
    assert C == op({3: {((), ()): 1}})


def test_truncation_drops_high_orders():
    P = op({1: {((), ((1, 1),)): 1}}, K=2)
    Q = op({2: {(((1, 1),), ()): 1}}, K=2)
    assert (P * Q).is_zero()


def test_window_error():
    with pytest.raises(WindowError):
        op({1: {((), ((5, 1),)): 1}}, config=AlgebraConfig(4))


def test_index_roles():
    cfg = AlgebraConfig(derivative_only=frozenset({0}))
    with pytest.raises(ValueError):
        op({1: {(((0, 1),), ()): 1}}, config=cfg)


def test_bernstein_degree_of_zero():
    assert bernstein_degree({}) == NEG_INF


@pytest.mark.parametrize("rng", seeded(40, 100))
def test_product_matches_composition(rng):
    P = random_weyl(rng, K=3)
    Q = random_weyl(rng, K=3)
    f = random_test_poly(rng)
    lhs = truncate_h(sym_apply(P * Q, f), 3)
    rhs = truncate_h(sym_apply(P, sym_apply(Q, f)), 3)
    assert sp.expand(lhs - rhs) == 0


@pytest.mark.parametrize("rng", seeded(40, 200))
def test_commutator_filtration(rng):
    P, Q = random_weyl(rng, K=5), random_weyl(rng, K=5)
    C = commutator(P, Q)
    for n in C.orders():
        assert n >= 2
        assert bernstein_degree(C.part(n)) <= n - 2
    assert C == P * Q - Q * P


@pytest.mark.parametrize("rng", seeded(20, 300))
def test_multiplication_associative(rng):
    P, Q, R = (random_weyl(rng, K=4) for _ in range(3))
    assert (P * Q) * R == P * (Q * R)


def _random_transvection(rng, K):
    q = {}
    for n in range(2, K + 1):
        p = {}
        for _ in range(2):
            idx = tuple(sorted(rng.choice([1, 2, 3]) for _ in range(rng.randint(1, n + 1))))
            m = {}
            for i in idx:
                m[i] = m.get(i, 0) + 1
            p[tuple(sorted(m.items()))] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        q[n] = p
    return Transvection(q)


@pytest.mark.parametrize("rng", seeded(25, 400))
def test_transvection_is_conjugation(rng):
    K = 3
    T = _random_transvection(rng, K)
    S = T.to_exponent(K)
    P = random_weyl(rng, K=K)
    g = random_test_poly(rng, degree=2, nterms=3)
    Ssym = sum(sp.Rational(c.numerator, c.denominator) * h ** j
               * sp.Mul(*[xsym(i) ** e for i, e in m])
               for j, p in S.terms.items() for m, c in p.items())
    E = truncate_h(sp.series(sp.exp(Ssym), h, 0, K + 1).removeO(), K)
    lhs = truncate_h(sym_apply(apply_transvection(P, T), sp.expand(E * g)), K)
    rhs = truncate_h(E * sym_apply(P, g), K)
    assert sp.expand(lhs - rhs) == 0


@pytest.mark.parametrize("rng", seeded(25, 500))
def test_transvection_round_trip_and_homomorphism(rng):
    T = _random_transvection(rng, 4)
    P, Q = random_weyl(rng, K=4), random_weyl(rng, K=4)
    TP = apply_transvection(P, T)
    assert apply_transvection(TP, T, "inverse") == P.with_config(TP.config)
    assert apply_transvection(P * Q, T) == TP * apply_transvection(Q, T)


def test_action_on_exponential():
    S = ExponentData({1: {((1, 3),): Fraction(1, 3)}}, 2)
    res = act_on_exponential(WeylOperator.hd(1, 3), S)
    assert res == {2: {((1, 2),): 1}}


@pytest.mark.parametrize("rng", seeded(15, 600))
def test_exponential_action_matches_sympy(rng):
    K = 3
    S = _random_transvection(rng, K).to_exponent(K - 1)
    P = random_weyl(rng, K=K)
    Ssym = sum(sp.Rational(c.numerator, c.denominator) * h ** j
               * sp.Mul(*[xsym(i) ** e for i, e in m])
               for j, p in S.terms.items() for m, c in p.items())
    E = truncate_h(sp.series(sp.exp(Ssym), h, 0, K + 1).removeO(), K)
    Einv = truncate_h(sp.series(sp.exp(-Ssym), h, 0, K + 1).removeO(), K)
    want = truncate_h(Einv * sym_apply(P, E), K)
    got = ExponentialAction(S, K).apply(P)
    got_sym = sum(sp.Rational(c.numerator, c.denominator) * h ** n
                  * sp.Mul(*[xsym(i) ** e for i, e in m])
                  for n, p in got.items() for m, c in p.items())
    assert sp.expand(got_sym - want) == 0


def test_records_round_trip():
    P = op({1: {((), ((1, 1),)): Fraction(1, 2)}, 3: {(((2, 2),), ((1, 1),)): -3}})
    assert operator_from_records(operator_to_records(P), 4) == P


def test_multiply_config_mismatch():
    P = WeylOperator.hd(1, 3, AlgebraConfig(5))
    Q = WeylOperator.hd(1, 3, AlgebraConfig(6))
    with pytest.raises(ValueError):
        multiply(P, Q)
