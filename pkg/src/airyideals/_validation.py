"""Argument checks shared by the estimators and the command line."""

from numbers import Integral

from .airy import GeneratorFamily
from .weyl import WeylOperator


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < minimum:
        raise ValueError(f"{name} must be at least {minimum}, got {value}")
    return int(value)


def check_rank(N):
    return check_positive_int(N, "rank", 2)


def check_order(K):
    return check_positive_int(K, "order", 2)


def check_window(N, kmax, varmax):
    kmax = check_positive_int(kmax, "kmax", 0)
    varmax = check_positive_int(varmax, "varmax", N + 1)
    return kmax, varmax


def check_family(F):
    if not isinstance(F, GeneratorFamily):
        raise TypeError("expected a GeneratorFamily")
    if not F.generators:
        raise ValueError("family has no generators")
    return F


def check_operators(ops):
    if isinstance(ops, WeylOperator):
        return [ops]
    ops = list(ops)
    for P in ops:
        if not isinstance(P, WeylOperator):
            raise TypeError("expected WeylOperator inputs")
    return ops
