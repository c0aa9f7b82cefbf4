from fractions import Fraction
from itertools import product
from math import comb, factorial

import pytest
import sympy as sp

from airyideals import airy, wsp
from airyideals.heisenberg import ModePolynomial, weight


def ck_oracle(N, K):
    """Taylor coefficients of g at x = 1 straight from the product over roots of unity."""
    u = sp.Symbol("u")
    x = 1 + u
    theta = sp.exp(2 * sp.pi * sp.I / N)
    g = x ** sp.Rational(1 - N, 2 * N) / N
    for k in range(1, N):
        g *= x ** sp.Rational(1, N) - theta ** k
    ser = sp.series(g, u, 0, K + 1).removeO()
    return [sp.nsimplify(sp.simplify(sp.expand_complex(ser.coeff(u, k)))) for k in range(K + 1)]


@pytest.mark.parametrize("N", [2, 3, 4])
def test_ck_against_root_of_unity_series(N):
    got = wsp.compute_ck(N, 4)
    want = ck_oracle(N, 4)
    assert [sp.Rational(c.numerator, c.denominator) for c in got] == want


@pytest.mark.parametrize("N", range(2, 9))
def test_ck_leading_values(N):
    c = wsp.compute_ck(N, 2)
    assert c[0] == 1 and c[1] == 0
    assert c[2] == Fraction(N * N - 1, 24 * N * N)


def test_ck_rank_validation():
    with pytest.raises(ValueError):
        wsp.compute_ck(1, 3)


def test_faa_di_bruno_small():
    assert wsp.faa_di_bruno(1) == {(0,): 1}
    assert wsp.faa_di_bruno(2) == {(0, 0): Fraction(1, 2), (1,): Fraction(1, 2)}
    assert wsp.faa_di_bruno(2, -1) == {(0, 0): Fraction(1, 2), (1,): Fraction(-1, 2)}
    # S_3 = (χ³ + 3χχ' + χ'')/6
    assert wsp.faa_di_bruno(3) == {(0, 0, 0): Fraction(1, 6), (0, 1): Fraction(1, 2),
                                   (2,): Fraction(1, 6)}


def multinomial_top(N, m):
    out = {}
    for alpha in product(range(m + 1), repeat=N):
        if sum(alpha) != m or sum(i * a for i, a in enumerate(alpha)) % N:
            continue
        labels = tuple(i for i, a in enumerate(alpha) for _ in range(a))
        w = factorial(m)
        for a in alpha:
            w //= factorial(a)
        out[labels] = Fraction(w)
    return out


@pytest.mark.parametrize("N", [2, 3, 4])
def test_top_degree_is_multinomial(N):
    for m in range(2, 2 * N + 1, 2):
        top = {k: v * wsp.prefactor(N, m) for k, v in wsp.v_basis_top(N, m).items()}
        assert top == multinomial_top(N, m)


def test_top_degree_rank_three():
    assert {k: 3 * v for k, v in wsp.v_basis_top(3, 2).items()} == {(0, 0): 1, (1, 2): 2}
    top4 = {k: v * 324 for k, v in wsp.v_basis_top(3, 4).items()}
    assert top4[(0, 0, 1, 2)] == 12 and top4[(1, 1, 2, 2)] == 6


def test_dilaton_shift_examples():
    p = ModePolynomial({2: {(-3, -3): 1}}, 2, 3)
    assert wsp.dilaton_shift(p) == ModePolynomial({0: {(): 1}, 1: {(-3,): 2},
                                                   2: {(-3, -3): 1}}, 2, 3)
    q = ModePolynomial({1: {(5,): 1}}, 1, 3)
    assert wsp.dilaton_shift(q) == q
    r = ModePolynomial({2: {(-4, -3): 1}}, 2, 3)
    assert wsp.dilaton_shift(r) == ModePolynomial(
        {0: {(): 1}, 1: {(-3,): 1, (-4,): 1}, 2: {(-4, -3): 1}}, 2, 3)
    with pytest.raises(ValueError):
        wsp.dilaton_shift(ModePolynomial({0: {(-3,): 1}}, 1, 3))


@pytest.mark.parametrize("N,m,k", [(3, 2, 0), (3, 4, 1), (3, 6, 2), (2, 4, 1), (4, 6, 0)])
def test_pre_shift_homogeneity_and_weight(N, m, k):
    W = wsp.assemble_w(N, m, k, 3 * N)
    assert list(W.terms) == [m]
    for mono in W.terms[m]:
        assert weight(mono, N) == m - k - 1


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_linear_parts_general(N):
    for m in range(2, 2 * N + 1, 2):
        for k in range(3):
            row = wsp.linear_row(N, m, k)
            want = {N * k + i: Fraction(factorial(m), factorial(m - i - 1) * factorial(i))
                    for i in range(m)}
            assert row == want


def test_linear_rows_rank_three():
    assert [wsp.linear_row(3, m, 0)[i] for m, i in [(2, 0), (2, 1)]] == [2, 2]
    assert [wsp.linear_row(3, 4, 0)[i] for i in range(4)] == [4, 12, 12, 4]
    assert [wsp.linear_row(3, 6, 0)[i] for i in range(6)] == [6, 30, 60, 60, 30, 6]


def test_shift_constants_rank_three():
    consts = {}
    for m in (2, 4, 6):
        for k in range(-3, 4):
            H = wsp.shifted_generator(3, m, k, 9, 1)
            if k >= 0:
                assert 0 not in H.terms
            c = H.terms.get(1, {}).get(())
            if c:
                consts[(m, k)] = c
    assert consts == {(4, -1): -6, (6, -1): -90}


def test_pascal_block():
    assert wsp.pascal_block(3) == [[2, 2, 0], [4, 12, 12], [6, 30, 60]]
    assert wsp.pascal_block(2) == [[2, 2], [4, 12]]
    for N in range(2, 9):
        M = wsp.pascal_block(N)
        assert wsp._det(M) != 0
        for i in range(1, N + 1):
            for j in range(1, N + 1):
                assert M[i - 1][j - 1] / j == comb(2 * i, j)


def test_block_recursion_rank_three():
    Ainv, T = wsp.block_recursion(3)
    assert Ainv[0] == [Fraction(15, 16), Fraction(-5, 16), Fraction(1, 16)]
    assert T[0] == [Fraction(-5, 2), Fraction(-15, 8), Fraction(-3, 8)]
    assert Ainv[1] == [Fraction(-7, 16), Fraction(5, 16), Fraction(-1, 16)]
    assert T[1] == [Fraction(5, 2), Fraction(15, 8), Fraction(3, 8)]
    # last entry follows from (1/24)·6 = 1/4
    assert T[2] == [-2, Fraction(-5, 4), Fraction(-1, 4)]
    # same block structure for every k
    assert wsp.block_recursion(3, 2) == (Ainv, T)


@pytest.fixture(scope="module")
def rank_three():
    cfg = wsp.TwistConfig(3, 3, 1, 8)
    F = wsp.build_family(cfg)
    return cfg, F, wsp.verify_wsp_airy(cfg, F)


def test_rank_three_small_window(rank_three):
    cfg, F, res = rank_three
    assert res.report.verdict == "airy-at-truncation"
    assert res.report.boundedness.certified
    nz, mats = airy.normalize(F)
    for a, H in nz.items():
        assert H.terms[1] == {((), ((a, 1),)): 1}
    assert mats.Nmat[0][0] == Fraction(15, 16)


def test_partition_routes_agree(rank_three):
    cfg, F, res = rank_three
    t1 = wsp.partition_wsp(cfg, F, res.normalized)
    t2 = airy.table_from_transvection(F, res.transvection)
    assert t1.exact_part() == t2.exact_part()
    assert all(0 not in k[2] for k in t1.keys() if k[1] >= 2)


def test_window_stability():
    tabs = []
    for V in (8, 11):
        cfg = wsp.TwistConfig(3, 3, 1, V)
        tabs.append(wsp.partition_wsp(cfg))
    a, b = tabs
    assert a.exact_part() and a.exact_part() == {k: v for k, v in b.exact_part().items()
                                                 if k in a.exact_part()}
    assert set(a.exact_part()) == set(b.exact_part())


def test_log_z_homogeneous_index_sum(rank_three):
    cfg, F, res = rank_three
    table = wsp.partition_wsp(cfg, F, res.normalized)
    for two_g, n, idx in table.keys():
        assert sum(idx) == cfg.index_bound(two_g + n - 2)


def test_rank_two_and_four():
    for args in [(2, 4, 2, 9), (4, 3, 1, 10)]:
        cfg = wsp.TwistConfig(*args)
        assert wsp.verify_wsp_airy(cfg).report.verdict == "airy-at-truncation"


def test_unshifted_family_rejected():
    cfg = wsp.TwistConfig(3, 3, 1, 8, shift=False)
    r = airy.check_airy(wsp.build_family(cfg))
    assert r.verdict == "rejected" and not r.form.passed


def test_config_validation():
    with pytest.raises(ValueError):
        wsp.TwistConfig(3, 4, 2, 3)
    with pytest.raises(ValueError):
        wsp.TwistConfig(1, 4, 2, 12)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_virasoro_constant(N):
    o = wsp.virasoro_oracle(N, mode_range=2, level_max=3)
    assert o.constant == o.formula_constant == 2 * N * wsp.compute_ck(N, 2)[2]
    # N symplectic-fermion pairs
    assert o.central_charge == -2 * N
    assert not wsp.virasoro_check(N, o.displayed_constant, mode_range=2)
    assert wsp.virasoro_check(N, o.constant, mode_range=2)
