"""Dilaton-shifted W(sp_2N) generators in the cyclically twisted boson module.

The twisted fields are built from the Faà di Bruno polynomials of
``χ^i(z) = (1/N) Σ_p θ^{ip} J_p z^{-p/N-1}``.  Averaging over ``i`` uses
``Σ_i θ^{is} = N [N | s]``, so every coefficient stays rational and no root
of unity is ever formed.

A field expression is stored as ``{(e, rs): c}`` meaning
``c · z^{-e} · Π_j ∂_z^{r_j} χ(z)`` with ``rs`` a sorted tuple of
derivative orders.
"""

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import comb, factorial

from . import airy
from .heisenberg import ModePolynomial, WeightMetadata, ZeroModeScenario, to_weyl
from .poly import mono_diff
from .weyl import AlgebraConfig


def _binom(alpha, k):
    out = Fraction(1)
    for j in range(k):
        out *= (alpha - j)
    return out / factorial(k)


def compute_ck(N, K):
    """Taylor coefficients ``c_0..c_K`` of ``g`` at ``x = 1``.

    ``g(1+u) = (1/N) Σ_{j<N} (1+u)^{(1-N)/(2N) + j/N}``, expanded with
    generalized binomial coefficients.
    """
    if N < 2:
        raise ValueError("rank N must be at least 2")
    if K < 0:
        raise ValueError("order must be non-negative")
    alphas = [Fraction(1 - N, 2 * N) + Fraction(j, N) for j in range(N)]
    return [sum((_binom(a, k) for a in alphas), Fraction(0)) / N for k in range(K + 1)]


# ---------------------------------------------------------------------------
# differential polynomials in χ


def _add(target, key, c):
    v = target.get(key, 0) + c
    if v:
        target[key] = v
    else:
        target.pop(key, None)


def _dz(expr):
    """``∂_z`` of a χ-polynomial without explicit z-powers (Leibniz rule)."""
    out = {}
    for rs, c in expr.items():
        for j in range(len(rs)):
            if j and rs[j] == rs[j - 1]:
                continue
            mult = rs.count(rs[j])
            new = tuple(sorted(rs[:j] + (rs[j] + 1,) + rs[j + 1:]))
            _add(out, new, c * mult)
    return out


@lru_cache(maxsize=None)
def _faa_di_bruno(n):
    if n == 0:
        return ((), 1),
    prev = dict(_faa_di_bruno(n - 1))
    out = _dz(prev)
    for rs, c in prev.items():
        _add(out, tuple(sorted(rs + (0,))), c)
    return tuple((rs, Fraction(c, n)) for rs, c in sorted(out.items()))


def faa_di_bruno(n, sign=1):
    """``S_n(±χ) = (1/n!)(∂_z ± χ)^n·1`` as ``{rs: coeff}``."""
    return {rs: c * (sign ** len(rs)) for rs, c in _faa_di_bruno(n)}


@dataclass(frozen=True)
class TwistedSeries:
    """A twisted field ``Σ_i f(χ^i)`` given by the χ-expression ``f``.

    ``terms`` maps ``(e, rs)`` to rational coefficients; ``N`` is the rank.
    Modes are extracted with :meth:`mode`.
    """

    N: int
    terms: tuple

    def as_dict(self):
        return dict(self.terms)

    def top_degree(self):
        d = max(len(rs) for (_, rs), _ in self.terms)
        return {k: c for k, c in self.terms if len(k[1]) == d}

    def mode(self, k, window, min_shift=0, shift_modes=()):
        """Coefficient of ``z^{-k-1}`` restricted to indices in ``[-window, window]``.

        Returns ``{monomial: coeff}``.  When ``min_shift`` is positive, only
        monomials with at least that many factors in ``shift_modes`` are kept.
        """
        N = self.N
        out = {}
        for (e, rs), c in self.terms:
            d = len(rs)
            total = Fraction(N) * (k + 1 - e - d - sum(rs))
            if total.denominator != 1:
                raise ArithmeticError("non-integer mode offset in twisted field")
            scale = c * Fraction(N) ** (1 - d)
            for mono in _multisets(d, int(total), window, min_shift, shift_modes):
                w = _slot_weight(mono, rs, N)
                if w:
                    _add(out, mono, scale * w)
        return out


def _multisets(d, total, window, min_shift=0, shift_modes=()):
    """Sorted ``d``-tuples in ``[-window, window]`` summing to ``total``."""
    shift_modes = tuple(sorted(shift_modes))
    if min_shift <= 0:
        yield from _sorted_tuples(d, total, -window, window, ())
        return
    # choose how many factors sit on each shift mode, then the rest avoids them
    free = [p for p in range(-window, window + 1) if p not in shift_modes]
    for counts in _count_splits(len(shift_modes), d):
        s = sum(counts)
        if s < min_shift:
            continue
        fixed = tuple(p for p, n in zip(shift_modes, counts) for _ in range(n))
        rest_total = total - sum(fixed)
        for rest in _sorted_tuples_from(d - s, rest_total, free, 0, ()):
            yield tuple(sorted(fixed + rest))


def _count_splits(slots, d):
    if slots == 0:
        yield ()
        return
    for n in range(d + 1):
        for tail in _count_splits(slots - 1, d - n):
            yield (n,) + tail


def _sorted_tuples(d, total, lo, hi, prefix):
    if d == 0:
        if total == 0:
            yield prefix
        return
    if total < d * lo or total > d * hi:
        return
    # smallest element first, remaining elements ≥ it
    start = max(lo, total - (d - 1) * hi)
    stop = min(hi, total // d)
    for p in range(start, stop + 1):
        yield from _sorted_tuples(d - 1, total - p, p, hi, prefix + (p,))


def _sorted_tuples_from(d, total, values, start, prefix):
    if d == 0:
        if total == 0:
            yield prefix
        return
    if start >= len(values):
        return
    lo, hi = values[start], values[-1]
    if total < d * lo or total > d * hi:
        return
    for s in range(start, len(values)):
        p = values[s]
        if p * d > total:
            break
        yield from _sorted_tuples_from(d - 1, total - p, values, s, prefix + (p,))


def _falling(a, r):
    out = Fraction(1)
    for j in range(r):
        out *= (a - j)
    return out


def _slot_weight(mono, rs, N):
    """Σ over distinct assignments of the modes to derivative slots of Π ff(-p/N-1, r)."""
    if not any(rs):
        # all slots equivalent: number of distinct orderings
        counts = defaultdict(int)
        for p in mono:
            counts[p] += 1
        w = factorial(len(mono))
        for n in counts.values():
            w //= factorial(n)
        return w
    total = Fraction(0)
    for perm in set(permutations(mono)):
        w = Fraction(1)
        for p, r in zip(perm, rs):
            w *= _falling(Fraction(-p, N) - 1, r)
            if not w:
                break
        total += w
    return total


# ---------------------------------------------------------------------------
# assembly


def w_field(N, m):
    """The twisted field ``W^m / ℏ^m`` as a :class:`TwistedSeries`."""
    if m % 2 or not 2 <= m <= 2 * N:
        raise ValueError("m must be even with 2 ≤ m ≤ 2N")
    return _w_field(N, m)


@lru_cache(maxsize=None)
def _w_field(N, m):
    c = compute_ck(N, m)
    out = {}
    for k in range(m + 1):
        if not c[k]:
            continue
        for sign in (-1, 1):
            for rs, v in faa_di_bruno(m - k, sign).items():
                _add(out, (k, rs), c[k] * v)
    for k in range(1, m):
        if not c[k]:
            continue
        for rs, v in faa_di_bruno(m - 1 - k).items():
            _add(out, (k + 1, rs), k * c[k] * v)
    for k in range(m):
        if not c[k]:
            continue
        for rs, v in _dz(faa_di_bruno(m - 1 - k)).items():
            _add(out, (k, rs), -c[k] * v)
    return TwistedSeries(N, tuple(sorted(out.items())))


def v_basis_top(N, m):
    """Top-degree block of ``W^m/ℏ^m`` in the ``v^a`` basis: ``{labels: coeff}``.

    ``v^a(z) = Σ_{p ≡ a mod N} J_p z^{-p/N-1}``; ``labels`` is the sorted tuple
    of residues ``a``.
    """
    f = w_field(N, m)
    out = {}
    for (e, rs), c in f.top_degree().items():
        if e or any(rs):
            continue
        d = len(rs)
        scale = c * Fraction(N) ** (1 - d)
        for labels in _residue_multisets(N, d):
            if sum(labels) % N:
                continue
            counts = defaultdict(int)
            for a in labels:
                counts[a] += 1
            w = factorial(d)
            for n in counts.values():
                w //= factorial(n)
            _add(out, labels, scale * w)
    return out


def _residue_multisets(N, d, start=0):
    if d == 0:
        yield ()
        return
    for a in range(start, N):
        for rest in _residue_multisets(N, d - 1, a):
            yield (a,) + rest


def assemble_w(N, m, k, window, K=None):
    """Pre-shift ``W^m_k`` (ℏ^m-homogeneous) restricted to the index window."""
    terms = w_field(N, m).mode(k, window)
    return ModePolynomial({m: terms}, m if K is None else max(K, m), N)


def dilaton_shift(p, N=None):
    """Shift ``ℏJ_{-N} → ℏJ_{-N} + 1`` and ``ℏJ_{-N-1} → ℏJ_{-N-1} + 1``."""
    N = p.N if N is None else N
    a_mode, b_mode = -N, -N - 1
    out = {}
    for n, mono, c in p.items():
        a = mono.count(a_mode)
        b = mono.count(b_mode)
        rest = tuple(q for q in mono if q not in (a_mode, b_mode))
        for a2 in range(a + 1):
            for b2 in range(b + 1):
                order = n - (a - a2) - (b - b2)
                if order < 0:
                    raise ValueError("dilaton shift produced a negative ℏ-order")
                if order > p.K:
                    continue
                m2 = tuple(sorted(rest + (a_mode,) * a2 + (b_mode,) * b2))
                _add(out.setdefault(order, {}), m2, c * comb(a, a2) * comb(b, b2))
    return ModePolynomial(out, p.K, p.N, p.scenario)


def prefactor(N, m):
    return Fraction(N ** (m - 1) * factorial(m), 2)


def shifted_generator(N, m, k, window, K):
    """``H^m_k = (N^{m-1} m!/2)·φ(W^m_k)`` up to ℏ-order ``K`` inside the window.

    Only monomials that reach ℏ-order ≤ K after the shift are enumerated.
    """
    need = max(0, m - K)
    terms = w_field(N, m).mode(k, window, min_shift=need, shift_modes=(-N - 1, -N))
    p = ModePolynomial({m: terms}, m, N)
    shifted = dilaton_shift(p, N)
    return ModePolynomial(shifted.terms, K, N).scale(prefactor(N, m))


def generator_label(N, i):
    """``L_i = H^m_k`` with ``i = Nk + m/2 - 1``: returns ``(m, k)``."""
    k, r = divmod(i, N)
    return 2 * (r + 1), k


def linear_row(N, m, k):
    """Exact ℏ¹ derivative coefficients of ``H^m_k`` as ``{index: coeff}``."""
    window = max(N * abs(k) + 2 * N + 1, N + 2)
    H = shifted_generator(N, m, k, window, 1)
    row = {}
    for mono, c in H.terms.get(1, {}).items():
        if len(mono) == 1 and mono[0] >= 0:
            row[mono[0]] = c
    return row


def pascal_block(N):
    """``M_ij = (2i)!/((2i-j)!(j-1)!)`` for ``j ≤ 2i``, ``1 ≤ i, j ≤ N``."""
    M = [[Fraction(factorial(2 * i), factorial(2 * i - j) * factorial(j - 1))
          if j <= 2 * i else Fraction(0) for j in range(1, N + 1)] for i in range(1, N + 1)]
    if _det(M) == 0:
        raise ArithmeticError("Pascal block is singular")
    return M


def block_recursion(N, k=0):
    """``(A^{-1}, T)`` with ``ℏJ_{Nk+r} = Σ_s A^{-1}_{rs} L_{Nk+s} + Σ_s T_{rs} ℏJ_{N(k+1)+s}``.

    Both matrices are computed from the exact linear rows of block ``k``.
    """
    rows = [linear_row(N, 2 * (r + 1), k) for r in range(N)]
    A = {r: {a - N * k: c for a, c in row.items() if a < N * (k + 1)} for r, row in enumerate(rows)}
    B = [[row.get(N * (k + 1) + s, Fraction(0)) for s in range(N)] for row in rows]
    Ainv = airy._invert_dense(list(range(N)), list(range(N)), A)
    T = [[-sum(Ainv[r][t] * B[t][s] for t in range(N)) for s in range(N)] for r in range(N)]
    return Ainv, T


def _det(M):
    A = [list(r) for r in M]
    n = len(A)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return det


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class TwistConfig:
    """Rank ``N``, ℏ-truncation ``K``, checked modes ``k ≤ kmax``, variables ``≤ varmax``."""

    N: int
    K: int
    kmax: int
    varmax: int
    shift: bool = True

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("rank N must be at least 2")
        if self.K < 2:
            raise ValueError("ℏ-order K must be at least 2")
        if self.kmax < 0:
            raise ValueError("kmax must be non-negative")
        if self.varmax < self.N + 1:
            raise ValueError("varmax must reach the shifted modes N and N+1")

    @property
    def support_kmax(self):
        """Largest ``k`` whose generators can have in-window terms at order ≤ K.

        A term ``ℏ^n x^β ∂^δ`` of ``H^m_k`` satisfies
        ``N n + Σδ - Σβ ≥ N(k+1)``; in the window ``Σδ ≤ n·varmax``.
        """
        N, K, V = self.N, self.K, self.varmax
        return max(self.kmax, (K * (N + V)) // N - 1, (V + 1) // N)

    def index_bound(self, j):
        # log Z at ℏ-order j is homogeneous of index sum (N+1)j
        return (self.N + 1) * j


def build_modes(cfg, ks=None):
    """``{i: H^m_k}`` as mode polynomials for the support window."""
    N = cfg.N
    ks = range(cfg.support_kmax + 1) if ks is None else ks
    out = {}
    for k in ks:
        for r in range(N):
            m = 2 * (r + 1)
            i = N * k + r
            if cfg.shift:
                out[i] = shifted_generator(N, m, k, cfg.varmax, cfg.K)
            else:
                w = ModePolynomial({m: w_field(N, m).mode(k, cfg.varmax)}, cfg.K, N)
                out[i] = w.scale(prefactor(N, m))
    return out


def family_from_modes(cfg, modes):
    N = cfg.N
    config = ZeroModeScenario.RHO.config(cfg.varmax)
    gens = {i: to_weyl(p, ZeroModeScenario.RHO, config) for i, p in modes.items()}
    labels = {i: generator_label(N, i) for i in gens}
    rows = {i: linear_row(N, m, k) for i, (m, k) in labels.items()} if cfg.shift else None
    return airy.GeneratorFamily(
        gens, cfg.K, max_var_index=cfg.varmax, infinite=True,
        weight_meta=WeightMetadata(N, labels), linear_rows=rows, block=N,
        check_indices=[i for i in gens if labels[i][1] <= cfg.kmax],
        index_bound=cfg.index_bound, label=f"W(sp_{2 * N})")


def build_family(cfg, cache=None):
    """The reindexed family ``L_{Nk+m/2-1} = H^m_k`` under the zero-mode-as-derivative scenario."""
    modes = cache.load(cfg) if cache is not None else None
    if modes is None:
        modes = build_modes(cfg)
        if cache is not None:
            cache.store(cfg, modes)
    return family_from_modes(cfg, modes)


@dataclass
class WspResult:
    family: object
    report: object
    normalized: dict = None
    matrices: object = None
    transvection: object = None
    forms: dict = None
    zero_mode_terms: dict = None


def zero_mode_polynomial_terms(H0):
    """Derivative-free part of ``H̃_0`` at ℏ².

    Reduction modulo the ideal only raises ℏ-orders, so this is exactly the
    ℏ² first-order form of index 0; when nonzero, the conjugate zero mode
    enters ``log Z`` linearly.
    """
    return {xs: c for (xs, ds), c in H0.part(2).items() if not ds}


def verify_wsp_airy(cfg, family=None, cache=None):
    F = family if family is not None else build_family(cfg, cache)
    report = airy.check_airy(F)
    result = WspResult(F, report)
    if report.verdict != "airy-at-truncation":
        return result
    normalized, mats = airy.normalize(F)
    result.normalized, result.matrices = normalized, mats
    result.transvection, result.forms = airy.extract_transvection(F, normalized)
    result.zero_mode_terms = zero_mode_polynomial_terms(normalized[0])
    return result


def partition_wsp(cfg, family=None, normalized=None, cache=None):
    F = family if family is not None else build_family(cfg, cache)
    if normalized is None:
        normalized, _ = airy.normalize(F)
    return airy.solve_partition(F, normalized)


# ---------------------------------------------------------------------------
# Virasoro constant oracle


def _apply(P, f):
    """Apply a derivative-free-ℏ Weyl operator (ℏ ignored) to a polynomial."""
    out = {}
    for _, (xs, ds), c in P.items():
        g = dict(f)
        for i, e in ds:
            for _ in range(e):
                h = {}
                for m, v in g.items():
                    r = mono_diff(m, i)
                    if r is not None:
                        _add(h, r[1], v * r[0])
                g = h
                if not g:
                    break
            if not g:
                break
        for m, v in g.items():
            mm = dict(m)
            for i, e in xs:
                mm[i] = mm.get(i, 0) + e
            _add(out, tuple(sorted(mm.items())), c * v)
    return out


def _fock_states(level_max, N):
    """Monomials ``Π x_j`` with ``Σ j ≤ level_max`` (a spanning set of low states)."""
    states = [()]
    for level in range(1, level_max + 1):
        for parts in _partitions(level):
            m = defaultdict(int)
            for p in parts:
                m[p] += 1
            states.append(tuple(sorted(m.items())))
    return states


def _partitions(n, largest=None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for p in range(min(n, largest), 0, -1):
        for rest in _partitions(n - p, p):
            yield (p,) + rest


@dataclass
class VirasoroOracle:
    constant: Fraction            # z^{-2} coefficient of W²(z)/ℏ², summed over bosons
    central_charge: Fraction
    formula_constant: Fraction    # 2N·c_2, one 2c_2 per boson
    displayed_constant: Fraction  # N·c_2, one c_2 per boson
    pairs_checked: int
    states_checked: int

    @property
    def formula_consistent(self):
        return self.constant == self.formula_constant


class _VirasoroModes:
    """``L_n = W²_{n+1}/2`` without its constant, acting on Fock polynomials.

    Functions of ``x_1, x_2, …`` only, so the zero mode acts as zero.  Every
    state only meets finitely many terms of each mode, and the window is
    chosen large enough to contain all of them.
    """

    def __init__(self, N, mode_range, level_max):
        self.N = N
        window = N * (2 * mode_range + 3) + level_max + 2
        config = AlgebraConfig(window)
        f = w_field(N, 2)
        self.L = {}
        for n in range(-2 * mode_range, 2 * mode_range + 1):
            modes = f.mode(n + 1, window)
            modes.pop((), None)
            P = ModePolynomial({2: modes}, 2, N)
            self.L[n] = to_weyl(P, ZeroModeScenario.RHO, config).scale(Fraction(1, 2))
        self.states = _fock_states(level_max, N)
        self.mode_range = mode_range

    def act(self, n, vec):
        return _apply(self.L[n], vec)

    def bracket(self, m, n, vec):
        out = dict(self.act(m, self.act(n, vec)))
        for k, v in self.act(n, self.act(m, vec)).items():
            _add(out, k, -v)
        return out

    def vacuum_constant(self, m):
        """``<0|[L_m, L_{-m}]|0> - 2m<0|L_0|0>`` without the added constant."""
        vac = {(): Fraction(1)}
        return (self.bracket(m, -m, vac).get((), 0)
                - 2 * m * self.act(0, vac).get((), 0))

    def holds(self, lam, c):
        """Check ``[L_m, L_n] = (m-n)L_{m+n} + c/12 (m³-m)δ`` with ``L_0 += lam``."""
        R = self.mode_range
        for m in range(-R, R + 1):
            for n in range(-R, R + 1):
                for s in self.states:
                    vec = {s: Fraction(1)}
                    lhs = self.bracket(m, n, vec)
                    rhs = {k: (m - n) * v for k, v in self.act(m + n, vec).items()}
                    if m + n == 0:
                        _add(rhs, s, (m - n) * lam + Fraction(c, 12) * (m ** 3 - m))
                    for k, v in rhs.items():
                        _add(lhs, k, -v)
                    if lhs:
                        return False
        return True


def virasoro_check(N, constant, mode_range=3, level_max=3):
    """Do the modes of ``W²`` with the given ``z^{-2}`` constant satisfy Virasoro?

    The central charge is fitted from ``[L_2, L_{-2}]`` on the vacuum.
    """
    V = _VirasoroModes(N, mode_range, level_max)
    lam = Fraction(constant) / 2
    c = 2 * (V.vacuum_constant(2) - 4 * lam)
    return V.holds(lam, c)


def virasoro_oracle(N, mode_range=3, level_max=3):
    """Solve for the constant in ``W²`` that makes ``L_n = W²_{n+1}/2`` Virasoro.

    ``[L_1, L_{-1}] = 2L_0`` on the vacuum is affine in the unknown constant
    with nonzero slope, so it fixes the constant uniquely.  The central
    charge then follows from ``[L_2, L_{-2}]`` and every pair with
    ``|m|, |n| ≤ mode_range`` is checked on all states up to ``level_max``.
    """
    V = _VirasoroModes(N, mode_range, level_max)
    lam = V.vacuum_constant(1) / 2
    c = 2 * (V.vacuum_constant(2) - 4 * lam)
    if not V.holds(lam, c):
        raise ArithmeticError("no constant makes the W² modes Virasoro")
    c2 = compute_ck(N, 2)[2]
    pairs = (2 * mode_range + 1) ** 2
    return VirasoroOracle(2 * lam, c, 2 * N * c2, N * c2, pairs, len(V.states))
