"""Airy ideals: condition checks, normalization, reduction and partition functions.

A :class:`GeneratorFamily` is a finite window onto a (possibly infinite)
family ``{H_i}``.  The pipeline is

* :func:`linear_part` and :func:`invert_banded` build ``M`` and its inverse,
* :func:`normalize` forms ``H̃_a = Σ_i N_{ai} H_i = ℏ∂_a + O(ℏ²)``,
* :func:`reduce_mod_ideal` rewrites an operator to a polynomial remainder,
* :func:`check_airy` checks that ``ℏ^{-2}[H_i, H_j]`` lies in the ideal for all pairs,
* :func:`extract_transvection` and :func:`solve_partition` produce ``log Z``
  along two independent routes.
"""

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .poly import (euler_integrate, mono_degree, mono_indices,
                   mono_mul, padd, pdegree, pdiff)
from .weyl import (AlgebraConfig, ExponentData, ExponentialAction, Transvection,
                   WeylOperator, WindowError, commutator, format_q, weyl_mono_mul)


class SingularBlockError(ValueError):
    def __init__(self, block):
        super().__init__(f"linear part has a singular diagonal block at block {block}")
        self.block = block


class ClosednessError(ValueError):
    def __init__(self, a, b, n):
        super().__init__(f"∂_{a} p_{b} ≠ ∂_{b} p_{a} at ℏ-order {n}")
        self.a, self.b, self.n = a, b, n


class InconsistentEquations(ValueError):
    pass


@dataclass
class GeneratorFamily:
    """A window onto an indexed family of operators.

    ``generators`` maps generator indices to materialized operators sharing
    one configuration and truncation ``K``.  ``infinite`` marks a family whose
    index set continues beyond the window.  ``linear_rows`` optionally gives
    the exact ℏ¹ coefficients ``{i: {a: M_ia}}`` when the materialized
    operators were cut to a variable window.  ``block`` enables block-banded
    inversion.  ``check_indices`` restricts the pairs used in the commutator check.
    ``index_bound(j)`` bounds the index sum of ``log Z`` at ℏ-order ``j`` and
    drives the exactness window.
    """

    generators: dict
    K: int
    max_var_index: int | None = None
    infinite: bool = False
    weight_meta: object = None
    linear_rows: dict | None = None
    block: int | None = None
    check_indices: list | None = None
    index_bound: object = None
    label: str = ""

    def __post_init__(self):
        configs = {g.config for g in self.generators.values()}
        if len(configs) > 1:
            raise ValueError("generators use different algebra configurations")
        for g in self.generators.values():
            if g.K != self.K:
                raise ValueError("generators must share the family truncation K")

    @property
    def config(self):
        for g in self.generators.values():
            return g.config
        return AlgebraConfig(self.max_var_index)

    @property
    def max_gen_index(self):
        return max(self.generators) if self.generators else None

    def indices(self):
        return sorted(self.generators)

    def pair_indices(self):
        return sorted(self.check_indices) if self.check_indices is not None else self.indices()

    def is_exact(self, j, indices):
        """Is an entry of ``log Z`` at ℏ-order ``j`` certified exact?"""
        if j > self.K - 1:
            return False
        if self.index_bound is None or self.max_var_index is None:
            return True
        return self.index_bound(j) <= self.max_var_index


# ---------------------------------------------------------------------------
# boundedness


@dataclass
class BoundednessReport:
    passed: bool
    certified: bool
    signatures: int
    witnesses: list = field(default_factory=list)

    def to_dict(self):
        return {"passed": self.passed, "certified": self.certified,
                "signatures": self.signatures,
                "witnesses": [{"hbar": n, "x": [list(t) for t in key[0]],
                               "d": [list(t) for t in key[1]], "generators": gens}
                              for (n, key), gens in self.witnesses]}


def signature_occurrences(F):
    occ = defaultdict(list)
    for i in F.indices():
        for n, key, _ in F.generators[i].items():
            occ[(n, key)].append(i)
    return occ


def validate_bounded(F):
    """Check that each monomial signature occurs in finitely many generators.

    Inside the window the lists are finite by construction.  Beyond it the
    family's weight metadata must certify finiteness; a family declared
    infinite without metadata fails on any signature that repeats up to the
    window edge.
    """
    occ = signature_occurrences(F)
    witnesses = []
    meta = F.weight_meta
    if meta is not None:
        for (n, key), gens in occ.items():
            dsum = sum(i * e for i, e in key[1])
            for g in gens:
                delta, k = meta.labels[g]
                if not meta.admissible(dsum, delta, k):
                    witnesses.append(((n, key), gens))
                    break
        return BoundednessReport(not witnesses, True, len(occ), witnesses)
    if F.infinite:
        top = F.max_gen_index
        for sig, gens in occ.items():
            if len(gens) > 1 and top in gens:
                witnesses.append((sig, gens))
    return BoundednessReport(not witnesses, False, len(occ), witnesses)


# ---------------------------------------------------------------------------
# linear parts and normalization


@dataclass
class ShapeReport:
    passed: bool
    violations: dict = field(default_factory=dict)  # generator -> list of (n, key)


@dataclass
class NormalizationMatrices:
    M: dict      # row i -> {column a: M_ia}
    Nmat: dict   # column a -> {row i: N_ai}
    columns: list

    def check_inverse(self, rows=None):
        """``Σ_i N_bi M_ia = δ_ab`` on the window (rows default: all of Nmat)."""
        cols = self.columns
        for b in (rows if rows is not None else sorted(self.Nmat)):
            acc = defaultdict(Fraction)
            for i, nbi in self.Nmat[b].items():
                for a, mia in self.M.get(i, {}).items():
                    acc[a] += nbi * mia
            for a in cols:
                if acc.get(a, 0) != (1 if a == b else 0):
                    return False
        return True


def linear_part(F):
    """Return ``(M, shape)``: ℏ¹ derivative coefficients and shape violations."""
    M = {}
    violations = {}
    for i in F.indices():
        P = F.generators[i]
        row = {}
        bad = []
        for n, key, c in P.items():
            if n == 0:
                bad.append((n, key))
            elif n == 1:
                xs, ds = key
                if xs or len(ds) != 1 or ds[0][1] != 1:
                    bad.append((n, key))
                else:
                    row[ds[0][0]] = c
        if F.linear_rows is not None:
            row = dict(F.linear_rows.get(i, {}))
        if row:
            M[i] = row
        else:
            # a generator without ℏ¹ derivative part makes M singular
            bad.append((1, None))
        if bad:
            violations[i] = bad
    return M, ShapeReport(not violations, violations)


def _invert_dense(rows, cols, M):
    """Gauss-Jordan inverse over ℚ of the square matrix ``M[rows][cols]``."""
    n = len(rows)
    if n != len(cols):
        raise ValueError(f"linear part is not square: {n} generators, {len(cols)} columns")
    colpos = {a: j for j, a in enumerate(cols)}
    A = [[Fraction(0)] * n + [Fraction(int(r == s)) for s in range(n)] for r in range(n)]
    for r, i in enumerate(rows):
        for a, v in M.get(i, {}).items():
            if a in colpos:
                A[r][colpos[a]] = Fraction(v)
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c]), None)
        if piv is None:
            raise SingularBlockError(c)
        A[c], A[piv] = A[piv], A[c]
        inv = 1 / A[c][c]
        A[c] = [v * inv for v in A[c]]
        for r in range(n):
            if r != c and A[r][c]:
                f = A[r][c]
                A[r] = [v - f * w for v, w in zip(A[r], A[c])]
    # A[:, n:] is M^{-1}: rows indexed by columns of M, columns by generators
    return [row[n:] for row in A]


def invert_banded(M, rows, block=None):
    """Two-sided inverse ``N`` of the linear part on the window.

    With ``block = N`` the rows ``Nk..Nk+N-1`` form block ``k`` whose columns
    start at ``Nk``; the system ``L_k = A_k J_k + Σ_{j>k} B_kj J_j`` is solved
    by back substitution from the last block, and tail columns beyond the
    last block are dropped (they only feed generators outside the window).
    Without ``block`` the window matrix is inverted directly.
    Returns ``{a: {i: N_ai}}``.
    """
    rows = sorted(rows)
    if block is None:
        cols = sorted({a for i in rows for a in M.get(i, {})})
        inv = _invert_dense(rows, cols, M)
        return {a: {i: inv[r][s] for s, i in enumerate(rows) if inv[r][s]}
                for r, a in enumerate(cols)}
    if len(rows) % block or rows != list(range(len(rows))):
        raise ValueError("banded inversion needs rows 0..N(kw+1)-1")
    nblocks = len(rows) // block
    Nmat = {}
    for k in reversed(range(nblocks)):
        brows = list(range(block * k, block * (k + 1)))
        A = {i: {a: v for a, v in M.get(i, {}).items() if a in brows} for i in brows}
        try:
            Ainv = _invert_dense(brows, brows, A)
        except SingularBlockError:
            raise SingularBlockError(k) from None
        # J_k = A^{-1}(L_k - Σ_{j>k} B_kj J_j)
        rhs = {}
        for r, i in enumerate(brows):
            vec = defaultdict(Fraction)
            vec[i] += 1
            for a, v in M.get(i, {}).items():
                if a >= block * (k + 1) and a in Nmat:
                    for m, w in Nmat[a].items():
                        vec[m] -= v * w
            rhs[i] = vec
        for r, a in enumerate(brows):
            acc = defaultdict(Fraction)
            for s, i in enumerate(brows):
                if Ainv[r][s]:
                    for m, w in rhs[i].items():
                        acc[m] += Ainv[r][s] * w
            Nmat[a] = {m: v for m, v in acc.items() if v}
    return Nmat


def normalize(F, columns=None):
    """Return ``({a: H̃_a}, NormalizationMatrices)``.

    ``columns`` selects which ``H̃_a`` to build (default: every column of the
    inverse that lies inside the variable window).
    """
    M, _ = linear_part(F)
    Nmat = invert_banded(M, F.indices(), F.block)
    if columns is None:
        columns = sorted(a for a in Nmat
                         if F.max_var_index is None or a <= F.max_var_index)
    mats = NormalizationMatrices(M, Nmat, sorted(Nmat))
    out = {}
    for a in columns:
        acc = {}
        for i, c in sorted(Nmat[a].items()):
            for n, p in F.generators[i].terms.items():
                padd(acc.setdefault(n, {}), p, c)
        out[a] = WeylOperator({n: p for n, p in acc.items() if p}, F.K, F.config,
                              check=False)
    for a, H in out.items():
        expected = {((), ((a, 1),)): 1}
        if H.terms.get(0) or H.terms.get(1, {}) != expected:
            raise ValueError(f"normalized generator {a} is not ℏ∂_{a} + O(ℏ²)")
    return out, mats


# ---------------------------------------------------------------------------
# reduction modulo the ideal


class Reducer:
    """Polynomial remainders modulo the left ideal of a normalized family.

    The remainder of ``x^β ℏ^n ∂^δ`` is ``x^β`` times the remainder of
    ``ℏ^n ∂^δ``, and the latter is memoized per derivative monomial and
    ℏ-order.  The rightmost (largest-index) derivative ``ℏ∂_b`` is replaced
    by ``-(H̃_b - ℏ∂_b)``, which raises the ℏ-order.
    """

    def __init__(self, normalized, K):
        self.K = K
        self.tails = {}
        for b, H in normalized.items():
            tail = {n: dict(p) for n, p in H.terms.items() if n >= 2}
            self.tails[b] = tail
        self._expansions = {}
        self._memo = {}

    def _expand(self, ds):
        if ds in self._expansions:
            return self._expansions[ds]
        b, e = ds[-1]
        if b not in self.tails:
            raise WindowError(f"no normalized generator for ∂_{b}: window too small")
        rest = ds[:-1] + (((b, e - 1),) if e > 1 else ())
        drest = mono_degree(rest)
        out = []
        for nr, part in self.tails[b].items():
            order = drest + nr
            if order > self.K:
                continue
            for key, r in part.items():
                for w, (xs2, ds2), _ in weyl_mono_mul(((), rest), key):
                    out.append((-r * w, xs2, ds2, order - mono_degree(ds2)))
        self._expansions[ds] = out
        return out

    def rem_at(self, ds, o):
        """Remainder of ``ℏ^{|δ|}∂^δ`` at ℏ-order ``o`` (a polynomial)."""
        if not ds:
            return {(): Fraction(1)} if o == 0 else {}
        if o <= mono_degree(ds) or o > self.K:
            return {}
        key = (ds, o)
        if key in self._memo:
            return self._memo[key]
        acc = {}
        for c, xs2, ds2, shift in self._expand(ds):
            sub = self.rem_at(ds2, o - shift)
            for m, v in sub.items():
                m2 = mono_mul(xs2, m)
                w = acc.get(m2, 0) + c * v
                if w:
                    acc[m2] = w
                else:
                    acc.pop(m2, None)
        self._memo[key] = acc
        return acc

    def reduce(self, P, K=None):
        K = self.K if K is None else min(K, self.K)
        out = {}
        for n, (xs, ds), c in P.items():
            if n > K:
                continue
            if not ds:
                padd(out.setdefault(n, {}), {xs: c})
                continue
            shift = n - mono_degree(ds)
            for o in range(mono_degree(ds) + 1, K - shift + 1):
                sub = self.rem_at(ds, o)
                if sub:
                    t = out.setdefault(o + shift, {})
                    for m, v in sub.items():
                        m2 = mono_mul(xs, m)
                        w = t.get(m2, 0) + c * v
                        if w:
                            t[m2] = w
                        else:
                            t.pop(m2, None)
        return {n: p for n, p in out.items() if p}


def reduce_mod_ideal(P, normalized, K=None):
    """Remainder of ``P`` modulo the ideal, as ``(series, consumed_orders)``."""
    K = P.K if K is None else K
    r = Reducer(normalized, K).reduce(P, K)
    return r, list(range(K + 1))


# ---------------------------------------------------------------------------
# condition checks


@dataclass
class AiryReport:
    boundedness: BoundednessReport
    form: ShapeReport
    commutator_passed: bool
    witness: tuple | None = None      # (i, j)
    remainder: dict | None = None     # ℏ-series of polynomials
    hbar_degree: int | None = None
    hbar_degree_exact: bool = False
    pairs_checked: int = 0
    message: str = ""

    @property
    def verdict(self):
        ok = self.boundedness.passed and self.form.passed and self.commutator_passed
        return "airy-at-truncation" if ok else "rejected"

    def to_dict(self):
        rem = None
        if self.remainder is not None:
            rem = [{"hbar": n, "x": [list(t) for t in m], "coeff": format_q(c)}
                   for n in sorted(self.remainder) for m, c in sorted(self.remainder[n].items())]
        return {
            "verdict": self.verdict,
            "boundedness": self.boundedness.to_dict(),
            "form": {"passed": self.form.passed,
                     "violations": {str(i): len(v) for i, v in sorted(self.form.violations.items())}},
            "commutator": {"passed": self.commutator_passed,
                           "pairs_checked": self.pairs_checked,
                           "witness": list(self.witness) if self.witness else None,
                           "remainder": rem},
            "hbar_degree": self.hbar_degree,
            "hbar_degree_exact": self.hbar_degree_exact,
            "message": self.message,
        }


def hbar_degree(F):
    top = max((max(g.terms) for g in F.generators.values() if g.terms), default=0)
    return top, top < F.K


def check_airy(F, normalized=None):
    """Check boundedness, shape and condition (4) on the family's window."""
    bounded = validate_bounded(F)
    _, form = linear_part(F)
    deg, exact = hbar_degree(F)
    report = AiryReport(bounded, form, False, hbar_degree=deg, hbar_degree_exact=exact)
    if not form.passed:
        report.message = "generators are not of the form ℏ∂ + O(ℏ²) combinations"
        return report
    if normalized is None:
        try:
            normalized, _ = normalize(F)
        except (SingularBlockError, ValueError) as exc:
            report.form = ShapeReport(False, {})
            report.message = str(exc)
            return report
    Kc = F.K - 2
    reducer = Reducer(normalized, Kc)
    idx = F.pair_indices()
    for s, i in enumerate(idx):
        for j in idx[s + 1:]:
            C = commutator(F.generators[i], F.generators[j])
            for n in (0, 1):
                if C.terms.get(n):
                    raise AssertionError("commutator has terms below ℏ²")
            rem = reducer.reduce(C.shift(-2), Kc)
            report.pairs_checked += 1
            if rem:
                report.witness = (i, j)
                report.remainder = rem
                report.message = f"ℏ^-2 [H_{i}, H_{j}] has a nonzero polynomial remainder"
                return report
    report.commutator_passed = True
    return report


# ---------------------------------------------------------------------------
# transvection and partition function


def _check_closed(p_by_index, n):
    keys = sorted(p_by_index)
    derivs = {a: {b: pdiff(p_by_index[a], b) for b in keys} for a in keys}
    for s, a in enumerate(keys):
        for b in keys[s + 1:]:
            if derivs[b][a] != derivs[a][b]:
                raise ClosednessError(a, b, n)


def first_order_forms(normalized, K):
    """``{a: {n: p_a^{(n)}}}`` with ``H̄_a = ℏ∂_a + Σ ℏ^n p_a^{(n)}`` in the ideal."""
    reducer = Reducer(normalized, K)
    out = {}
    for a, H in normalized.items():
        tail = WeylOperator({n: p for n, p in H.terms.items() if n >= 2}, K, H.config,
                            check=False)
        out[a] = reducer.reduce(tail, K)
    return out


def extract_transvection(F, normalized=None, zero_indices=None):
    """Stable transvection of an Airy family via first-order normal forms."""
    if normalized is None:
        normalized, _ = normalize(F)
    if zero_indices is None:
        zero_indices = F.config.derivative_only
    K = F.K
    forms = first_order_forms(normalized, K)
    active = set(normalized)
    q = {}
    for n in range(2, K + 1):
        pn = {a: forms[a].get(n, {}) for a in normalized}
        _check_closed(pn, n)
        qn = euler_integrate(pn, active)
        if qn:
            q[n] = qn
    T = Transvection.from_exponent(
        ExponentData({n - 1: {m: -c for m, c in p.items()} for n, p in q.items()}, K),
        variable_only=frozenset(zero_indices))
    return T, forms


def solve_exponent(F, normalized=None):
    """Order-by-order solution ``S`` of ``H̃_a e^S = 0`` up to ℏ-order ``K-1``."""
    if normalized is None:
        normalized, _ = normalize(F)
    K = F.K
    active = set(normalized)
    tails = {a: WeylOperator({n: p for n, p in H.terms.items() if n >= 2}, K, H.config,
                             check=False)
             for a, H in normalized.items()}
    S = {}
    for r in range(2, K + 1):
        action = ExponentialAction(ExponentData(S, r - 2), r)
        grads = {}
        for a in sorted(normalized):
            val = action.apply(tails[a], orders={r}).get(r, {})
            grads[a] = {m: -c for m, c in val.items()}
        try:
            _check_closed(grads, r)
        except ClosednessError as exc:
            raise InconsistentEquations(str(exc)) from None
        Sr = euler_integrate(grads, active)
        if Sr:
            S[r - 1] = Sr
    return ExponentData(S, K - 1)


@dataclass
class FgnTable:
    """Partition-function coefficients ``F_{g,n}[a_1..a_n]`` keyed by ``(2g, n, indices)``."""

    entries: dict
    exact: dict

    @classmethod
    def from_exponent(cls, S, is_exact=lambda j, idx: True):
        entries, exact = {}, {}
        for j, p in S.terms.items():
            for m, c in p.items():
                n = mono_degree(m)
                two_g = j + 2 - n
                if two_g < 0:
                    raise ValueError("negative genus entry")
                w = 1
                for _, e in m:
                    w *= factorial(e)
                key = (two_g, n, mono_indices(m))
                entries[key] = c * w
                exact[key] = bool(is_exact(j, key[2]))
        return cls(entries, exact)

    def keys(self):
        return sorted(self.entries, key=lambda k: (k[0] + k[1] - 2, k[1], k[2]))

    def __len__(self):
        return len(self.entries)

    def get(self, two_g, n, indices, default=0):
        return self.entries.get((two_g, n, tuple(sorted(indices))), default)

    def exact_part(self):
        return {k: v for k, v in self.entries.items() if self.exact[k]}

    def to_records(self):
        return [{"two_g": k[0], "n": k[1], "indices": list(k[2]),
                 "value": format_q(self.entries[k]), "exact": self.exact[k]}
                for k in self.keys()]

    @classmethod
    def from_records(cls, records):
        entries, exact = {}, {}
        for r in records:
            key = (r["two_g"], r["n"], tuple(r["indices"]))
            entries[key] = Fraction(r["value"])
            exact[key] = r["exact"]
        return cls(entries, exact)


def solve_partition(F, normalized=None):
    S = solve_exponent(F, normalized)
    return FgnTable.from_exponent(S, F.is_exact)


def table_from_transvection(F, T):
    return FgnTable.from_exponent(T.to_exponent(F.K - 1), F.is_exact)


def airy_from_exponential(E, indices=None, config=None):
    """Family ``H̄_a = ℏ∂_a − Σ_j ℏ^{j+1} ∂_a S_j`` annihilating ``exp(S)``."""
    if not E.stable:
        raise ValueError("exponent data must be stable (orders ≥ 1)")
    for j, p in E.terms.items():
        d = pdegree(p)
        if d is not None and d > j + 2:
            raise ValueError("degree bound violated")
    K = E.K + 1
    if indices is None:
        indices = E.indices() or [1]
    indices = sorted(set(indices) | set(E.indices()))
    gens = {}
    for a in indices:
        terms = {1: {((), ((a, 1),)): Fraction(1)}}
        for j, p in E.terms.items():
            for m, c in pdiff(p, a).items():
                terms.setdefault(j + 1, {})[(m, ())] = -c
        gens[a] = WeylOperator(terms, K, config)
    return GeneratorFamily(gens, K, max_var_index=None, label="from-exponential")


def canonical_family(indices, K, config=None):
    """``{ℏ∂_a}``, whose partition function is ``Z = 1``."""
    return GeneratorFamily({a: WeylOperator.hd(a, K, config) for a in indices}, K)
