"""Exact arithmetic in the ℏ-truncated Rees Weyl algebra.

An operator is stored as ``{n: {(xs, ds): coeff}}`` where ``n`` is the
ℏ-order, ``xs`` and ``ds`` are sorted ``(index, exponent)`` tuples for the
variable and derivative factors, and variables stand to the left of
derivatives.  The term ``ℏ^n x^xs ∂^ds`` is admissible only when its
Bernstein degree ``|xs| + |ds|`` is at most ``n``.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

from .poly import (mono_degree, mono_diff, mono_mul, padd, pdegree, pdiff,
                   pmul, series_add)

NEG_INF = -math.inf


class WindowError(ValueError):
    """A monomial or correction term left the configured index window."""


class ConfigMismatch(ValueError):
    pass


@dataclass(frozen=True)
class AlgebraConfig:
    """Index window and index roles shared by a set of operators.

    ``variable_only`` indices may appear only as ``x_a``; ``derivative_only``
    indices only as ``∂_a``.  ``max_index`` of ``None`` means no window.
    """

    max_index: int | None = None
    variable_only: frozenset = frozenset()
    derivative_only: frozenset = frozenset()

    def check_key(self, key):
        xs, ds = key
        for i, _ in xs + ds:
            if i < 0:
                raise ValueError(f"negative variable index {i}")
            if self.max_index is not None and i > self.max_index:
                raise WindowError(f"index {i} outside window 0..{self.max_index}")
        for i, _ in xs:
            if i in self.derivative_only:
                raise ValueError(f"x_{i} not allowed: index {i} is derivative-only")
        for i, _ in ds:
            if i in self.variable_only:
                raise ValueError(f"∂_{i} not allowed: index {i} is variable-only")

    def unrestricted(self):
        return AlgebraConfig(self.max_index)


def _normalize_exps(pairs):
    out = {}
    for i, e in pairs:
        if e < 0:
            raise ValueError("negative exponent")
        if e:
            out[int(i)] = out.get(int(i), 0) + int(e)
    return tuple(sorted(out.items()))


def weyl_mono_mul(k1, k2):
    """Normal-ordered product of two Weyl monomials.

    Returns a list of ``(coefficient, key, loss)`` where ``loss`` is the
    number of contracted ``∂x`` pairs (each lowers the Bernstein degree by 2).
    """
    xa, da = k1
    xb, db = k2
    if not da or not xb:
        return [(1, (mono_mul(xa, xb), mono_mul(da, db)), 0)]
    dmap = dict(da)
    common = [(i, dmap[i], e) for i, e in xb if i in dmap]
    if not common:
        return [(1, (mono_mul(xa, xb), mono_mul(da, db)), 0)]
    # per common index: choices (kappa, weight)
    choices = []
    for i, b, g in common:
        choices.append([(k, comb(b, k) * comb(g, k) * factorial(k))
                        for k in range(min(b, g) + 1)])
    out = []
    for pick in itertools.product(*choices):
        w = 1
        removed = {}
        for (i, _, _), (k, wk) in zip(common, pick):
            w *= wk
            if k:
                removed[i] = k
        if removed:
            xb2 = tuple((i, e - removed.get(i, 0)) for i, e in xb
                        if e - removed.get(i, 0))
            da2 = tuple((i, e - removed.get(i, 0)) for i, e in da
                        if e - removed.get(i, 0))
        else:
            xb2, da2 = xb, da
        out.append((w, (mono_mul(xa, xb2), mono_mul(da2, db)), sum(removed.values())))
    return out


def key_degree(key):
    return mono_degree(key[0]) + mono_degree(key[1])


def key_indices(key):
    return {i for i, _ in key[0]} | {i for i, _ in key[1]}


class WeylOperator:
    """Truncated ℏ-series ``Σ_{n≤K} ℏ^n P_n`` with ``P_n`` of Bernstein degree ≤ n.

    Orders above ``K`` are unknown, not zero.  Instances are treated as
    immutable; arithmetic returns new objects.
    """

    __slots__ = ("terms", "K", "config")

    def __init__(self, terms, K, config=None, check=True):
        self.K = int(K)
        self.config = config if config is not None else AlgebraConfig()
        clean = {}
        for n, part in terms.items():
            if n > self.K:
                continue
            if n < 0:
                raise ValueError("negative ℏ-order in a WeylOperator")
            d = {k: Fraction(c) for k, c in part.items() if c}
            if d:
                clean[int(n)] = d
        self.terms = clean
        if check:
            for n, part in clean.items():
                for key in part:
                    self.config.check_key(key)
                    if key_degree(key) > n:
                        raise ValueError(
                            f"term of Bernstein degree {key_degree(key)} at ℏ-order {n}")

    # construction helpers
    @classmethod
    def from_terms(cls, items, K, config=None):
        """Build from ``(n, xs, ds, coeff)`` tuples; exponents may repeat."""
        terms = {}
        for n, xs, ds, c in items:
            key = (_normalize_exps(xs), _normalize_exps(ds))
            part = terms.setdefault(n, {})
            part[key] = part.get(key, 0) + Fraction(c)
        return cls(terms, K, config)

    @classmethod
    def zero(cls, K, config=None):
        return cls({}, K, config, check=False)

    @classmethod
    def constant(cls, c, K, order=0, config=None):
        return cls({order: {((), ()): c}}, K, config)

    @classmethod
    def hd(cls, a, K, config=None):
        """``ℏ∂_a``."""
        return cls({1: {((), ((a, 1),)): 1}}, K, config)

    @classmethod
    def hx(cls, a, K, config=None):
        """``ℏx_a``."""
        return cls({1: {(((a, 1),), ()): 1}}, K, config)

    # basic queries
    def is_zero(self):
        return not self.terms

    def items(self):
        for n in sorted(self.terms):
            for key, c in self.terms[n].items():
                yield n, key, c

    def part(self, n):
        return dict(self.terms.get(n, {}))

    def orders(self):
        return sorted(self.terms)

    def num_terms(self):
        return sum(len(p) for p in self.terms.values())

    def max_index(self):
        idx = [i for _, key, _ in self.items() for i in key_indices(key)]
        return max(idx) if idx else None

    def truncate(self, K):
        return WeylOperator(self.terms, min(K, self.K), self.config, check=False)

    def with_config(self, config):
        return WeylOperator(self.terms, self.K, config)

    def __eq__(self, other):
        if not isinstance(other, WeylOperator):
            return NotImplemented
        return self.K == other.K and self.terms == other.terms

    def __hash__(self):
        return hash((self.K, tuple(self.items())))

    def __repr__(self):
        return f"WeylOperator(K={self.K}, {format_operator(self)})"

    # linear structure
    def _combine(self, other, sign):
        _check_same(self, other)
        K = min(self.K, other.K)
        out = {n: dict(p) for n, p in self.terms.items() if n <= K}
        for n, p in other.terms.items():
            if n > K:
                continue
            padd(out.setdefault(n, {}), p, sign)
        return WeylOperator(out, K, self.config, check=False)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        c = Fraction(c)
        return WeylOperator({n: {k: c * v for k, v in p.items()}
                             for n, p in self.terms.items()}, self.K, self.config,
                            check=False)

    def shift(self, s):
        """Multiply by ``ℏ^s`` (``s`` may be negative; low orders must vanish)."""
        out = {}
        for n, p in self.terms.items():
            m = n + s
            if m < 0:
                raise ValueError("shift would create a negative ℏ-order")
            for key in p:
                if key_degree(key) > m:
                    raise ValueError("shift leaves the Rees algebra")
            out[m] = dict(p)
        return WeylOperator(out, self.K + s, self.config, check=False)

    def __mul__(self, other):
        if isinstance(other, WeylOperator):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)


def _check_same(P, Q):
    if P.config != Q.config:
        raise ConfigMismatch("operators live in different algebra configurations")


def multiply(P, Q, K=None):
    """Normal-ordered product ``P·Q`` truncated at ``min(K_P, K_Q)``."""
    _check_same(P, Q)
    Kr = min(P.K, Q.K) if K is None else min(K, P.K, Q.K)
    out = {}
    for n1, p1 in P.terms.items():
        for n2, p2 in Q.terms.items():
            n = n1 + n2
            if n > Kr:
                continue
            target = out.setdefault(n, {})
            for k1, c1 in p1.items():
                for k2, c2 in p2.items():
                    for w, key, _ in weyl_mono_mul(k1, k2):
                        v = target.get(key, 0) + w * c1 * c2
                        if v:
                            target[key] = v
                        else:
                            target.pop(key, None)
    return WeylOperator(out, Kr, P.config, check=False)


def commutator(P, Q, K=None):
    """``PQ − QP``; only contraction terms survive, so it is computed directly."""
    _check_same(P, Q)
    Kr = min(P.K, Q.K) if K is None else min(K, P.K, Q.K)
    out = {}

    def add(A, B, sign):
        for n1, p1 in A.terms.items():
            for n2, p2 in B.terms.items():
                n = n1 + n2
                if n > Kr:
                    continue
                target = out.setdefault(n, {})
                for k1, c1 in p1.items():
                    if not k1[1]:
                        continue
                    dset = {i for i, _ in k1[1]}
                    for k2, c2 in p2.items():
                        if not any(i in dset for i, _ in k2[0]):
                            continue
                        for w, key, loss in weyl_mono_mul(k1, k2):
                            if loss == 0:
                                continue
                            v = target.get(key, 0) + sign * w * c1 * c2
                            if v:
                                target[key] = v
                            else:
                                target.pop(key, None)

    add(P, Q, 1)
    add(Q, P, -1)
    return WeylOperator(out, Kr, P.config, check=False)


def bernstein_degree(p):
    """Maximum Bernstein degree of a combination of Weyl monomials.

    ``p`` is a mapping from ``(xs, ds)`` keys to coefficients, or a
    ``WeylOperator`` (all orders).  The zero combination gives ``-inf``.
    """
    if isinstance(p, WeylOperator):
        keys = [key for _, key, _ in p.items()]
    else:
        keys = [k for k, c in p.items() if c]
    if not keys:
        return NEG_INF
    return max(key_degree(k) for k in keys)


# ---------------------------------------------------------------------------
# exponential-type data and transvections


def _check_exponent_poly(j, p, what):
    d = pdegree(p)
    if d is not None and d > j + 2:
        raise ValueError(f"{what} at ℏ-order {j} has degree {d} > {j + 2}")
    if p.get((), 0):
        raise ValueError(f"{what} at ℏ-order {j} has a constant term")


@dataclass(frozen=True)
class ExponentData:
    """The logarithm ``S`` of ``Z = exp(S)`` as an ℏ-series of polynomials.

    ``terms[j]`` is the polynomial at ℏ-order ``j ≥ -1``; it has degree at
    most ``j + 2`` and no constant term.  Orders above ``K`` are unknown.
    """

    terms: dict
    K: int

    def __post_init__(self):
        clean = {}
        for j, p in self.terms.items():
            if j > self.K:
                continue
            if j < -1:
                raise ValueError("ℏ-order below -1 in exponent data")
            p = {m: Fraction(c) for m, c in p.items() if c}
            _check_exponent_poly(j, p, "exponent")
            if p:
                clean[j] = p
        object.__setattr__(self, "terms", clean)

    @property
    def stable(self):
        return all(j >= 1 for j in self.terms)

    def derivative(self, a):
        """``ℏ ∂_a S`` as an ℏ-series."""
        out = {}
        for j, p in self.terms.items():
            dp = pdiff(p, a)
            if dp:
                out[j + 1] = dp
        return out

    def indices(self):
        return sorted({i for p in self.terms.values() for m in p for i, _ in m})


@dataclass(frozen=True)
class Transvection:
    """Polynomials ``q^{(n+1)}`` and linear pieces ``s^{(n+1)}``.

    ``q[n]`` has degree ≤ n+1 and no constant term; ``s[n]`` is linear in the
    variable-only indices.  The associated automorphism sends ``ℏ∂_a`` to
    ``ℏ∂_a + Σ ℏ^n ∂_a(q^{(n+1)} + s^{(n+1)})`` and fixes ``ℏ`` and ``ℏx_a``.
    """

    q: dict = field(default_factory=dict)
    s: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("q", "s"):
            data = {}
            for n, p in getattr(self, name).items():
                p = {m: Fraction(c) for m, c in p.items() if c}
                d = pdegree(p)
                if d is not None and d > n + 1:
                    raise ValueError(f"{name}^({n + 1}) has degree {d} > {n + 1}")
                if p.get((), 0):
                    raise ValueError(f"{name}^({n + 1}) has a constant term")
                if name == "s" and d is not None and d > 1:
                    raise ValueError("s pieces must be linear")
                if p:
                    data[n] = p
            object.__setattr__(self, name, data)

    @property
    def stable(self):
        return not any(n in self.q or n in self.s for n in (0, 1))

    def potential(self):
        """``q^{(n+1)} + s^{(n+1)}`` by ``n``."""
        out = {n: dict(p) for n, p in self.q.items()}
        for n, p in self.s.items():
            padd(out.setdefault(n, {}), p)
        return {n: p for n, p in out.items() if p}

    def to_exponent(self, K):
        """``S = −Σ ℏ^{n−1}(q^{(n+1)} + s^{(n+1)})`` with ``Z = exp(S)``."""
        return ExponentData({n - 1: {m: -c for m, c in p.items()}
                             for n, p in self.potential().items()}, K)

    @classmethod
    def from_exponent(cls, S, variable_only=frozenset()):
        q, s = {}, {}
        for j, p in S.terms.items():
            for m, c in p.items():
                target = s if (len(m) == 1 and m[0][1] == 1
                               and m[0][0] in variable_only) else q
                target.setdefault(j + 1, {})[m] = -c
        return cls(q, s)

    def inverse(self):
        return Transvection({n: {m: -c for m, c in p.items()} for n, p in self.q.items()},
                            {n: {m: -c for m, c in p.items()} for n, p in self.s.items()})


def _hbar_image(b, potential, K, config):
    """``H̄_b = ℏ∂_b + Σ ℏ^n ∂_b q^{(n+1)}`` as a WeylOperator."""
    terms = {1: {((), ((b, 1),)): Fraction(1)}}
    for n, p in potential.items():
        if n > K:
            continue
        dp = pdiff(p, b)
        for m, c in dp.items():
            part = terms.setdefault(n, {})
            key = (m, ())
            v = part.get(key, 0) + c
            if v:
                part[key] = v
            else:
                part.pop(key, None)
    return WeylOperator(terms, K, config)


def apply_transvection(P, T, direction="forward"):
    """Image of ``P`` under the transvection ``T`` (or its inverse)."""
    if direction not in ("forward", "inverse"):
        raise ValueError("direction must be 'forward' or 'inverse'")
    if direction == "inverse":
        T = T.inverse()
    config = P.config.unrestricted()
    potential = T.potential()
    for p in potential.values():
        for m in p:
            config.check_key((m, ()))
    K = P.K
    images = {}
    powers = {}

    def derivative_product(ds):
        if ds in powers:
            return powers[ds]
        result = WeylOperator.constant(1, K, config=config)
        for b, e in ds:
            if b not in images:
                images[b] = _hbar_image(b, potential, K, config)
            for _ in range(e):
                result = multiply(result, images[b])
        powers[ds] = result
        return result

    out = {}
    for n, key, c in P.items():
        xs, ds = key
        d = mono_degree(ds)
        left = WeylOperator({n - d: {(xs, ()): c}}, K, config, check=False)
        padd_operator(out, multiply(left, derivative_product(ds)))
    return WeylOperator(out, K, config, check=False)


def padd_operator(target, P, scale=1):
    for n, p in P.terms.items():
        padd(target.setdefault(n, {}), p, scale)
        if not target[n]:
            del target[n]
    return target


def _apply_hd(f, b, dS, K):
    """``(ℏ∂_b + ℏ∂_b S)`` applied to the ℏ-series ``f``."""
    out = {}
    for n, p in f.items():
        if n + 1 <= K:
            dp = pdiff(p, b)
            if dp:
                padd(out.setdefault(n + 1, {}), dp)
        for j, q in dS.items():
            if n + j <= K:
                padd(out.setdefault(n + j, {}), pmul(p, q))
    return {n: p for n, p in out.items() if p}


class ExponentialAction:
    """Evaluates ``e^{-S} P e^{S}·1`` for many operators against one ``S``.

    The series ``e^{-S} (ℏ∂)^δ e^{S}·1`` are cached per derivative monomial.
    """

    def __init__(self, S, K):
        self.S = S
        self.K = K
        self._dS = {}
        self._cache = {(): {0: {(): Fraction(1)}}}

    def dS(self, b):
        if b not in self._dS:
            self._dS[b] = self.S.derivative(b)
        return self._dS[b]

    def derivative_series(self, ds):
        if ds in self._cache:
            return self._cache[ds]
        # peel one factor of the largest index
        b, e = ds[-1]
        rest = ds[:-1] + (((b, e - 1),) if e > 1 else ())
        f = _apply_hd(self.derivative_series(rest), b, self.dS(b), self.K)
        self._cache[ds] = f
        return f

    def apply(self, P, orders=None):
        out = {}
        for n, key, c in P.items():
            xs, ds = key
            shift = n - mono_degree(ds)
            for j, p in self.derivative_series(ds).items():
                m = j + shift
                if m > self.K or (orders is not None and m not in orders):
                    continue
                target = out.setdefault(m, {})
                for mono, v in p.items():
                    mono2 = mono_mul(xs, mono)
                    w = target.get(mono2, 0) + c * v
                    if w:
                        target[mono2] = w
                    else:
                        target.pop(mono2, None)
        return {n: p for n, p in out.items() if p}


def act_on_exponential(P, S):
    """``(P·e^S)/e^S`` as an ℏ-series of polynomials.

    Valid up to ℏ-order ``min(K_P, K_S + 1)``; higher orders are dropped.
    """
    K = min(P.K, S.K + 1)
    return ExponentialAction(S, K).apply(P)


def evaluate_on_one(P):
    """``P·1``: keep the derivative-free terms."""
    out = {}
    for n, (xs, ds), c in P.items():
        if not ds:
            out.setdefault(n, {})[xs] = c
    return out


# ---------------------------------------------------------------------------
# serialization


def format_q(c):
    c = Fraction(c)
    return f"{c.numerator}/{c.denominator}"


def parse_q(s):
    return Fraction(s)


def operator_to_records(P):
    records = []
    for n in sorted(P.terms):
        for key in sorted(P.terms[n]):
            xs, ds = key
            records.append({"hbar": n, "x": [list(t) for t in xs],
                            "d": [list(t) for t in ds],
                            "coeff": format_q(P.terms[n][key])})
    return records


def operator_from_records(records, K, config=None):
    return WeylOperator.from_terms(
        [(r["hbar"], [tuple(t) for t in r["x"]], [tuple(t) for t in r["d"]],
          parse_q(r["coeff"])) for r in records], K, config)


def format_operator(P):
    if P.is_zero():
        return "0"
    pieces = []
    for n, (xs, ds), c in P.items():
        factors = [f"ℏ^{n}" if n != 1 else "ℏ"] if n else []
        factors += [f"x{i}" + (f"^{e}" if e > 1 else "") for i, e in xs]
        factors += [f"d{i}" + (f"^{e}" if e > 1 else "") for i, e in ds]
        pieces.append(f"{c}" + ("*" + "*".join(factors) if factors else ""))
    return " + ".join(pieces)


def series_from_operator(P):
    """Derivative-free operator as an ℏ-series of polynomials."""
    out = {}
    for n, (xs, ds), c in P.items():
        if ds:
            raise ValueError("operator contains derivatives")
        out.setdefault(n, {})[xs] = c
    return out


def operator_from_series(series, K, config=None):
    return WeylOperator({n: {(m, ()): c for m, c in p.items()} for n, p in series.items()},
                        K, config)


__all__ = [
    "AlgebraConfig", "WeylOperator", "ExponentData", "Transvection",
    "ExponentialAction", "WindowError", "ConfigMismatch", "NEG_INF",
    "multiply", "commutator", "bernstein_degree", "apply_transvection",
    "act_on_exponential", "evaluate_on_one", "operator_to_records",
    "operator_from_records", "format_operator", "format_q", "parse_q",
    "weyl_mono_mul", "series_add", "mono_diff",
]
