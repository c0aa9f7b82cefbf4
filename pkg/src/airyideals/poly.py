"""Sparse commutative polynomials with exact rational coefficients.

A monomial is a tuple of ``(index, exponent)`` pairs sorted by index; the
empty tuple is the constant monomial.  A polynomial is a plain ``dict``
mapping monomials to nonzero ``Fraction`` coefficients.  An ℏ-series of
polynomials is a ``dict`` mapping integer ℏ-orders to polynomials.
"""

from fractions import Fraction

ONE = ()


def mono_mul(a, b):
    """Product of two monomials."""
    if not a:
        return b
    if not b:
        return a
    out = dict(a)
    for i, e in b:
        out[i] = out.get(i, 0) + e
    return tuple(sorted(out.items()))


def mono_degree(m):
    return sum(e for _, e in m)


def mono_index_sum(m):
    return sum(i * e for i, e in m)


def mono_diff(m, index):
    """Derivative of a monomial: returns ``(factor, monomial)`` or ``None``."""
    for pos, (i, e) in enumerate(m):
        if i == index:
            if e == 1:
                return e, m[:pos] + m[pos + 1:]
            return e, m[:pos] + ((i, e - 1),) + m[pos + 1:]
    return None


def mono_from_indices(indices):
    """Monomial ``x_{a_1} ... x_{a_n}`` from a sequence of indices."""
    out = {}
    for i in indices:
        out[i] = out.get(i, 0) + 1
    return tuple(sorted(out.items()))


def mono_indices(m):
    """Sorted index tuple of a monomial, one entry per unit of exponent."""
    return tuple(i for i, e in m for _ in range(e))


def padd(target, p, scale=1):
    """Add ``scale * p`` into ``target`` in place, dropping zeros."""
    for m, c in p.items():
        v = target.get(m, 0) + scale * c
        if v:
            target[m] = v
        else:
            target.pop(m, None)
    return target


def pmul(p, q):
    out = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = mono_mul(m1, m2)
            v = out.get(m, 0) + c1 * c2
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def pscale(p, c):
    if not c:
        return {}
    return {m: c * v for m, v in p.items()}


def pdiff(p, index):
    out = {}
    for m, c in p.items():
        r = mono_diff(m, index)
        if r is not None:
            e, m2 = r
            out[m2] = out.get(m2, 0) + e * c
    return {m: c for m, c in out.items() if c}


def pdegree(p):
    """Total degree; ``None`` for the zero polynomial."""
    if not p:
        return None
    return max(mono_degree(m) for m in p)


def homogeneous_parts(p):
    parts = {}
    for m, c in p.items():
        parts.setdefault(mono_degree(m), {})[m] = c
    return parts


def variables(p):
    return sorted({i for m in p for i, _ in m})


def euler_integrate(p_by_index, active=None):
    """Recover ``q`` with ``∂_a q = p_a`` and ``q(0) = 0``.

    ``p_by_index`` maps an index ``a`` to the polynomial ``p_a``.  The degree
    used by the Euler operator counts only the ``active`` variables (default:
    the keys of ``p_by_index``); other variables are treated as parameters, so
    pure-parameter terms are set to zero.  Closedness is not checked here.
    """
    if active is None:
        active = set(p_by_index)
    out = {}
    for a, pa in p_by_index.items():
        for m, c in pa.items():
            m2 = mono_mul(m, ((a, 1),))
            d = sum(e for i, e in m2 if i in active)
            out[m2] = out.get(m2, 0) + Fraction(c) / d
    return {m: c for m, c in out.items() if c}


def series_add(target, s, scale=1):
    for n, p in s.items():
        padd(target.setdefault(n, {}), p, scale)
        if not target[n]:
            del target[n]
    return target


def series_mul(s, t, max_order):
    out = {}
    for n1, p1 in s.items():
        for n2, p2 in t.items():
            n = n1 + n2
            if n > max_order:
                continue
            padd(out.setdefault(n, {}), pmul(p1, p2))
            if not out[n]:
                del out[n]
    return out


def series_clean(s):
    return {n: p for n, p in s.items() if p}


def format_poly(p, var="x"):
    if not p:
        return "0"
    pieces = []
    for m in sorted(p):
        mono = "*".join(f"{var}{i}" + (f"^{e}" if e > 1 else "") for i, e in m)
        c = p[m]
        pieces.append(f"{c}*{mono}" if mono else f"{c}")
    return " + ".join(pieces)
