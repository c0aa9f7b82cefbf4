import random
from fractions import Fraction

import pytest
from helpers import seeded

from airyideals import airy
from airyideals.weyl import (AlgebraConfig, ExponentData, Transvection, WeylOperator,
                             apply_transvection, multiply)


def family(gens, K, **kw):
    return airy.GeneratorFamily({i: WeylOperator(t, K) for i, t in gens.items()}, K, **kw)


def d(a, c=1):
    return {((), ((a, 1),)): c}


def counterexample(K=3):
    return family({1: {1: d(1)}, 2: {1: d(2), 2: {(((1, 1),), ()): 1}}}, K)


def test_counterexample_rejected_with_remainder_hbar():
    r = airy.check_airy(counterexample())
    assert r.verdict == "rejected"
    assert r.witness == (1, 2)
    assert r.remainder == {1: {(): 1}}


def test_cubic_family_accepted():
    # ℏ∂_1 - ℏ²x_1² annihilates exp(ℏ x_1³/3)
    F = family({1: {1: d(1), 2: {(((1, 2),), ()): -1}}}, 3)
    r = airy.check_airy(F)
    assert r.verdict == "airy-at-truncation"
    assert r.hbar_degree == 2
    table = airy.solve_partition(F)
    assert table.get(0, 3, (1, 1, 1)) == 2
    assert len(table) == 1
    T, _ = airy.extract_transvection(F)
    assert T.q == {2: {((1, 3),): Fraction(-1, 3)}}


def test_normalization_two_by_two():
    F = family({1: {1: {**d(1), **d(2)}}, 2: {1: d(2)}}, 3)
    normalized, mats = airy.normalize(F)
    assert normalized[1] == WeylOperator.hd(1, 3)
    assert normalized[2] == WeylOperator.hd(2, 3)
    assert mats.Nmat == {1: {1: 1, 2: -1}, 2: {2: 1}}


def test_banded_matches_dense():
    rng = random.Random(5)
    N, nb = 3, 4
    M = {}
    for i in range(N * nb):
        k = i // N
        M[i] = {a: Fraction(rng.randint(-4, 4)) for a in range(N * k, min(N * (k + 2), N * nb))}
        M[i][i] = Fraction(rng.randint(5, 9))
    banded = airy.invert_banded(M, list(range(N * nb)), N)
    dense = airy.invert_banded(M, list(range(N * nb)))
    assert banded == dense


def test_singular_block():
    M = {0: {0: 1, 1: 1}, 1: {0: 2, 1: 2}}
    with pytest.raises(airy.SingularBlockError):
        airy.invert_banded(M, [0, 1], 2)


def test_unbounded_family_without_metadata():
    gens = {i: {1: d(i), 2: {((), ((1, 1),)): 1}} for i in (1, 2, 3)}
    F = family(gens, 3, infinite=True)
    report = airy.validate_bounded(F)
    assert not report.passed and not report.certified
    assert airy.check_airy(F).verdict == "rejected"
    assert airy.validate_bounded(family(gens, 3)).passed


def test_shape_violation():
    F = family({1: {1: d(1)}, 2: {0: {((), ()): 1}, 1: d(2)}}, 3)
    r = airy.check_airy(F)
    assert r.verdict == "rejected" and not r.form.passed


def test_reduction_of_ideal_elements():
    F = family({1: {1: d(1), 2: {(((1, 2),), ()): -1}},
                2: {1: d(2), 2: {(((1, 1),), ()): -1}}}, 4)
    # ∂_1(x_1²) = 2x_1 ≠ 0 = ∂_2(x_1): not closed, hence not Airy
    assert airy.check_airy(F).verdict == "rejected"
    G = family({1: {1: d(1), 2: {(((2, 1),), ()): -1}},
                2: {1: d(2), 2: {(((1, 1),), ()): -1}}}, 4)
    assert airy.check_airy(G).verdict == "airy-at-truncation"
    normalized, _ = airy.normalize(G)
    elem = multiply(WeylOperator({1: {(((1, 1),), ()): 1}}, 4), G.generators[2])
    rem, _ = airy.reduce_mod_ideal(elem, normalized)
    assert rem == {}
    rem, _ = airy.reduce_mod_ideal(WeylOperator.hd(1, 4), normalized)
    # ℏ∂_1 ≡ ℏ² x_2 modulo the ideal
    assert rem == {2: {((2, 1),): 1}}


def test_inconsistent_equations():
    F = family({1: {1: d(1), 2: {(((2, 1),), ()): 1}}, 2: {1: d(2)}}, 4)
    assert airy.check_airy(F).verdict == "rejected"
    with pytest.raises(airy.InconsistentEquations):
        airy.solve_exponent(F)


def test_canonical_family_has_trivial_table():
    F = airy.canonical_family([1, 2, 3], 4)
    assert airy.check_airy(F).verdict == "airy-at-truncation"
    assert len(airy.solve_partition(F)) == 0


def random_exponent(rng, K, indices=(1, 2, 3)):
    terms = {}
    for j in range(1, K + 1):
        p = {}
        for _ in range(rng.randint(1, 3)):
            deg = rng.randint(1, j + 2)
            m = {}
            for _ in range(deg):
                i = rng.choice(indices)
                m[i] = m.get(i, 0) + 1
            p[tuple(sorted(m.items()))] = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        terms[j] = p
    return ExponentData(terms, K)


@pytest.mark.parametrize("rng", seeded(20, 800))
def test_exponential_round_trip(rng):
    E = random_exponent(rng, 3)
    F = airy.airy_from_exponential(E, [1, 2, 3])
    assert airy.check_airy(F).verdict == "airy-at-truncation"
    S = airy.solve_exponent(F)
    assert S.terms == E.terms
    T, _ = airy.extract_transvection(F)
    assert T.to_exponent(3).terms == E.terms
    # the transvection maps the family to ℏ∂_a
    for a, H in F.generators.items():
        assert apply_transvection(H, T, "inverse") == WeylOperator.hd(a, H.K, AlgebraConfig())


def test_mixed_family_via_transvection():
    # ℏ∂_a conjugated by a transvection, then mixed by an invertible matrix
    T = Transvection({2: {((1, 2), (2, 1)): 1}, 3: {((2, 4),): Fraction(1, 2)}})
    base = {a: apply_transvection(WeylOperator.hd(a, 4), T) for a in (1, 2)}
    gens = {1: base[1] + base[2].scale(3), 2: base[2].scale(2)}
    F = airy.GeneratorFamily(gens, 4)
    assert airy.check_airy(F).verdict == "airy-at-truncation"
    T2, _ = airy.extract_transvection(F)
    assert T2.q == T.q


def test_table_records_round_trip():
    E = random_exponent(random.Random(3), 2)
    t = airy.solve_partition(airy.airy_from_exponential(E))
    assert airy.FgnTable.from_records(t.to_records()).entries == t.entries


def test_zero_mode_enters_linearly():
    # ℏ∂_0 + 3ℏ² with index 0 derivative-only: log Z gains -3ℏ x_0
    cfg = AlgebraConfig(derivative_only=frozenset({0}))
    gens = {0: WeylOperator({1: d(0), 2: {((), ()): 3}}, 3, cfg),
            1: WeylOperator({1: d(1), 2: {(((1, 2),), ()): -1}}, 3, cfg)}
    F = airy.GeneratorFamily(gens, 3)
    assert airy.check_airy(F).verdict == "airy-at-truncation"
    T, _ = airy.extract_transvection(F)
    assert T.s == {2: {((0, 1),): 3}}
    assert airy.solve_partition(F).entries == {(2, 1, (0,)): -3, (0, 3, (1, 1, 1)): 2}
