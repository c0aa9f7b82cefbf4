"""Normal-ordered polynomials in bosonic modes and their Weyl-algebra image.

Modes ``J_p`` (integer ``p``) satisfy ``[J_p, J_q] = p δ_{p+q,0}``.  The
conjugate zero mode ``J̃_0`` is the string ``"~0"``; it commutes with every
``J_p`` except ``J_0``, where ``[J_0, J̃_0] = +1`` (zero mode as a derivative)
or ``-1`` (zero mode as a variable).  A monomial is a tuple of modes in
canonical order: increasing index with ``"~0"`` right after ``0``.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import comb, factorial

from .weyl import AlgebraConfig, WeylOperator

CONJ = "~0"


class ZeroModeScenario(Enum):
    """How the zero mode is realised: ``RHO``: ``J_0 = ∂_0``; ``KAPPA``: ``J_0 = x_0``."""

    RHO = "rho"
    KAPPA = "kappa"

    @property
    def sign(self):
        return 1 if self is ZeroModeScenario.RHO else -1

    def config(self, max_index=None):
        """Generator subalgebra: no ``x_0`` for RHO, no ``∂_0`` for KAPPA."""
        if self is ZeroModeScenario.RHO:
            return AlgebraConfig(max_index, derivative_only=frozenset({0}))
        return AlgebraConfig(max_index, variable_only=frozenset({0}))


def mode_key(p):
    return (0, 1) if p == CONJ else (p, 0)


def sort_modes(modes):
    return tuple(sorted(modes, key=mode_key))


def bracket(p, q, scenario):
    """``[J_p, J_q]`` as a number."""
    if p == CONJ and q == CONJ:
        return 0
    if p == CONJ:
        return -scenario.sign if q == 0 else 0
    if q == CONJ:
        return scenario.sign if p == 0 else 0
    return p if p + q == 0 else 0


def _mul_right(mono, q, scenario):
    """Normal-order ``mono · J_q`` for a sorted ``mono``; returns {mono: coeff}."""
    if not mono or mode_key(mono[-1]) <= mode_key(q):
        return {mono + (q,): 1}
    *rest, p = mono
    rest = tuple(rest)
    out = {}
    for m, c in _mul_right(rest, q, scenario).items():
        m2 = m + (p,)
        out[m2] = out.get(m2, 0) + c
    b = bracket(p, q, scenario)
    if b:
        out[rest] = out.get(rest, 0) + b
    return {m: c for m, c in out.items() if c}


def normal_order_product(a, b, scenario):
    """Normal-ordered expansion of the product of sorted monomials ``a·b``."""
    current = {a: 1}
    for q in b:
        nxt = {}
        for m, c in current.items():
            for m2, c2 in _mul_right(m, q, scenario).items():
                nxt[m2] = nxt.get(m2, 0) + c * c2
        current = {m: c for m, c in nxt.items() if c}
    return current


def weight(mono, N):
    """Conformal weight ``-(sum of integer indices)/N``; ``J̃_0`` counts 0."""
    return Fraction(-sum(p for p in mono if p != CONJ), N)


class ModePolynomial:
    """ℏ-graded normal-ordered mode polynomial ``{n: {monomial: coeff}}``."""

    __slots__ = ("terms", "K", "N", "scenario")

    def __init__(self, terms, K, N=1, scenario=ZeroModeScenario.RHO):
        self.K = int(K)
        self.N = int(N)
        self.scenario = scenario
        clean = {}
        for n, part in terms.items():
            if n > self.K:
                continue
            d = {}
            for m, c in part.items():
                m = sort_modes(m)
                d[m] = d.get(m, 0) + Fraction(c)
            d = {m: c for m, c in d.items() if c}
            if d:
                clean[int(n)] = d
        self.terms = clean

    @classmethod
    def mode(cls, p, K, N=1, scenario=ZeroModeScenario.RHO, hbar=1):
        """``ℏ^hbar J_p``."""
        return cls({hbar: {(p,): 1}}, K, N, scenario)

    @classmethod
    def constant(cls, c, K, N=1, scenario=ZeroModeScenario.RHO, order=0):
        return cls({order: {(): c}}, K, N, scenario)

    def items(self):
        for n in sorted(self.terms):
            for m in sorted(self.terms[n], key=lambda t: [mode_key(p) for p in t]):
                yield n, m, self.terms[n][m]

    def is_zero(self):
        return not self.terms

    def _compatible(self, other):
        if self.scenario is not other.scenario:
            raise ValueError("scenario mismatch")
        if self.N != other.N:
            raise ValueError("rank mismatch")

    def __add__(self, other):
        self._compatible(other)
        K = min(self.K, other.K)
        out = {n: dict(p) for n, p in self.terms.items()}
        for n, p in other.terms.items():
            t = out.setdefault(n, {})
            for m, c in p.items():
                t[m] = t.get(m, 0) + c
        return ModePolynomial(out, K, self.N, self.scenario)

    def scale(self, c):
        return ModePolynomial({n: {m: c * v for m, v in p.items()}
                               for n, p in self.terms.items()}, self.K, self.N,
                              self.scenario)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __mul__(self, other):
        if isinstance(other, ModePolynomial):
            return mode_multiply(self, other)
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, ModePolynomial):
            return NotImplemented
        return (self.K, self.terms, self.scenario) == (other.K, other.terms, other.scenario)

    def __repr__(self):
        return f"ModePolynomial(K={self.K}, {format_modes(self)})"


def mode_multiply(p, q):
    """Normal-ordered product truncated at ``min(K_p, K_q)``."""
    p._compatible(q)
    K = min(p.K, q.K)
    out = {}
    for n1, a in p.terms.items():
        for n2, b in q.terms.items():
            n = n1 + n2
            if n > K:
                continue
            t = out.setdefault(n, {})
            for m1, c1 in a.items():
                for m2, c2 in b.items():
                    for m, c in normal_order_product(m1, m2, p.scenario).items():
                        t[m] = t.get(m, 0) + c * c1 * c2
    return ModePolynomial(out, K, p.N, p.scenario)


def _zero_block(a, b, scenario):
    """Weyl image of ``J_0^a J̃_0^b`` as ``{(xs0, ds0): coeff}`` in index 0."""
    if scenario is ZeroModeScenario.KAPPA:
        return {(a, b): 1}
    # ∂_0^a x_0^b = Σ_k C(a,k) C(b,k) k! x_0^{b-k} ∂_0^{a-k}
    return {(b - k, a - k): comb(a, k) * comb(b, k) * factorial(k)
            for k in range(min(a, b) + 1)}


def monomial_to_weyl(mono, scenario):
    """Weyl image of a normal-ordered mode monomial: list of (coeff, key)."""
    xs, ds = {}, {}
    coeff = 1
    a = b = 0
    for p in mono:
        if p == CONJ:
            b += 1
        elif p == 0:
            a += 1
        elif p > 0:
            ds[p] = ds.get(p, 0) + 1
        else:
            xs[-p] = xs.get(-p, 0) + 1
            coeff *= -p
    out = []
    for (e_x, e_d), c in _zero_block(a, b, scenario).items():
        x2, d2 = dict(xs), dict(ds)
        if e_x:
            x2[0] = e_x
        if e_d:
            d2[0] = e_d
        out.append((coeff * c, (tuple(sorted(x2.items())), tuple(sorted(d2.items())))))
    return out


def to_weyl(p, scenario=None, config=None):
    """Dictionary ``J_m → ∂_m``, ``J_{-m} → m x_m``; zero modes per scenario.

    ``config`` defaults to the scenario's generator subalgebra, so ``J̃_0``
    (which maps to the excluded zero-index factor) raises ``ValueError``.
    Pass ``AlgebraConfig(max_index)`` to work in the full Weyl algebra.
    """
    scenario = scenario or p.scenario
    if config is None:
        config = scenario.config()
    out = {}
    for n, mono, c in p.items():
        for w, key in monomial_to_weyl(mono, scenario):
            t = out.setdefault(n, {})
            v = t.get(key, 0) + w * c
            if v:
                t[key] = v
            else:
                t.pop(key, None)
    return WeylOperator(out, p.K, config)


@dataclass(frozen=True)
class WeightMetadata:
    """Declared conformal weight ``Δ`` and mode index ``k`` per generator.

    A generator ``W^Δ_k`` in rank ``N`` consists of monomials whose indices
    sum to ``N(k+1-Δ)``; a dilaton shift only removes creation modes, so the
    sum of its non-negative indices is still at least ``N(k+1-Δ)``.
    """

    N: int
    labels: dict  # generator index -> (Delta, k)

    def admissible(self, nonneg_index_sum, delta, k):
        return self.N * (k + 1 - delta) <= nonneg_index_sum


def weight_window_bound(meta, signature_index_sum, deltas=None):
    """Largest mode index ``k`` per weight ``Δ`` that may contain a signature.

    ``signature_index_sum`` is the sum of the non-negative mode indices of a
    monomial signature (equivalently, the sum of its derivative indices).
    Returns ``{Δ: k_max}``; every generator with ``k > k_max`` is certified
    not to contain the signature.
    """
    if meta is None:
        raise ValueError("family carries no weight metadata")
    if deltas is None:
        deltas = sorted({d for d, _ in meta.labels.values()})
    return {d: signature_index_sum // meta.N + d - 1 for d in deltas}


def modes_to_records(p):
    return [{"hbar": n, "modes": list(m),
             "coeff": f"{c.numerator}/{c.denominator}"} for n, m, c in p.items()]


def modes_from_records(records, K, N=1, scenario=ZeroModeScenario.RHO):
    terms = {}
    for r in records:
        m = tuple(CONJ if t == CONJ else int(t) for t in r["modes"])
        t = terms.setdefault(r["hbar"], {})
        t[m] = t.get(m, 0) + Fraction(r["coeff"])
    return ModePolynomial(terms, K, N, scenario)


def format_modes(p):
    if p.is_zero():
        return "0"
    pieces = []
    for n, m, c in p.items():
        f = ([f"ℏ^{n}"] if n else []) + [("J~0" if q == CONJ else f"J{q}") for q in m]
        pieces.append(f"{c}" + ("*" + "*".join(f) if f else ""))
    return " + ".join(pieces)
