"""Triple hypergeometric series X and X' with their single-sum representations.

    X(a,b;z)  = sum z1^m z2^n z3^p / (m! p! (a)_{2m+n+p} (b)_{m+n})
    X'(a,b;z) = sum z1^m z2^n z3^p (a)_{2m-n-p} / ((m-n)! p! (b)_m)

Each representation is an outer single sum whose terms carry an inner
two-variable series from :mod:`series_engine`.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable

from .errors import NoConvergence, OutOfRegion, ParameterPole
from .series_engine import (
    DEFAULT_OPTIONS, REGION_MARGIN, SDSpec, SeriesOptions, SeriesResult,
    h3_region_fraction, horn_h3, horn_h3_confluent, horn_h10, humbert_xi2,
    is_nonpositive_integer, is_positive_integer, kampe_de_feriet_x,
    srivastava_daoust,
)

_TINY = 1e-300


class Rep(str, Enum):
    AUTO = "Auto"
    X1 = "X1"
    X2 = "X2"
    X3 = "X3"
    XP1 = "Xp1"
    XP2 = "Xp2"
    XP3 = "Xp3"


X_REPS = (Rep.X1, Rep.X2, Rep.X3)
XP_REPS = (Rep.XP1, Rep.XP2, Rep.XP3)


@dataclass(frozen=True)
class TripleArg:
    z1: complex
    z2: complex
    z3: complex

    def __post_init__(self):
        for name in ("z1", "z2", "z3"):
            v = complex(getattr(self, name))
            if not cmath.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class SeriesParams:
    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))

    def shifted(self, da: int = 0, db: int = 0) -> "SeriesParams":
        return SeriesParams(self.a + da, self.b + db)


def _check_x_params(p: SeriesParams):
    if is_nonpositive_integer(p.a) or is_nonpositive_integer(p.b):
        raise ParameterPole(f"X needs a, b off the nonpositive integers, got ({p.a}, {p.b})")


def _check_xp_params(p: SeriesParams):
    if is_positive_integer(p.a):
        raise ParameterPole(f"X' needs a off the positive integers, got {p.a}")
    if is_nonpositive_integer(p.b):
        raise ParameterPole(f"X' needs b off the nonpositive integers, got {p.b}")


def _outer_sum(ratio: Callable[[int], complex], inner: Callable[[int], SeriesResult],
               opts: SeriesOptions, tag: str, start: int = 0) -> SeriesResult:
    """``sum_n c_n * inner(n)`` with ``c_start = 1`` and ``c_{n+1} = c_n * ratio(n)``."""
    coeff = 1 + 0j
    total = 0j
    err = 0.0
    small = 0
    for k, n in enumerate(range(start, start + opts.max_outer)):
        if coeff != 0:
            res = inner(n)
            term = coeff * res.value
            err += abs(coeff) * res.est_error
        else:
            term = 0j
        total += term
        if not cmath.isfinite(total):
            raise NoConvergence(f"{tag}: non-finite partial sum")
        if abs(term) <= opts.tol * abs(total) + _TINY:
            small += 1
            if small == 3:
                return SeriesResult(total, k + 1, err + abs(term), tag)
        else:
            small = 0
        coeff *= ratio(n)
        if coeff == 0:
            # every remaining term vanishes
            return SeriesResult(total, k + 1, err, tag)
    raise NoConvergence(f"{tag}: outer cap {opts.max_outer} reached")


# ---------------------------------------------------------------------------
# X

def _x_rep_rates(p: SeriesParams, z: TripleArg) -> dict:
    a, b = p.a, p.b
    return {
        Rep.X2: abs(z.z2) / abs(a * b),
        Rep.X1: abs(z.z1) / abs(a * (a + 1) * b),
        Rep.X3: abs(z.z3) / abs(a),
    }


def choose_x_rep(p: SeriesParams, z: TripleArg) -> Rep:
    rates = _x_rep_rates(p, z)
    return min(rates, key=lambda r: rates[r])  # dict order breaks ties: X2, X1, X3


def eval_x(p: SeriesParams, z: TripleArg, rep: Rep = Rep.AUTO,
           opts: SeriesOptions = DEFAULT_OPTIONS) -> SeriesResult:
    """Entire triple series X(a, b; z1, z2, z3)."""
    _check_x_params(p)
    rep = Rep(rep)
    if rep == Rep.AUTO:
        rep = choose_x_rep(p, z)
    if rep not in X_REPS:
        raise ValueError(f"{rep} is not a representation of X")
    a, b = p.a, p.b
    z1, z2, z3 = z.z1, z.z2, z.z3
    if rep == Rep.X1:
        ratio = lambda n: z1 / ((n + 1) * (a + 2 * n) * (a + 2 * n + 1) * (b + n))
        inner = lambda n: srivastava_daoust(
            SDSpec.of([(1, 1, 0)], [(a + 2 * n, 1, 1), (b + n, 1, 0)], "X1-inner"), z2, z3, opts=opts)
    elif rep == Rep.X2:
        ratio = lambda n: z2 / ((a + n) * (b + n))
        inner = lambda n: kampe_de_feriet_x(a + n, b + n, z1, z3, opts)
    else:
        ratio = lambda n: z3 / ((n + 1) * (a + n))
        inner = lambda n: srivastava_daoust(
            SDSpec.of([(1, 0, 1)], [(a + n, 2, 1), (b, 1, 1)], "X3-inner"), z1, z2, opts=opts)
    return _outer_sum(ratio, inner, opts, rep.value)


def dx_d1(p: SeriesParams, z: TripleArg, opts: SeriesOptions = DEFAULT_OPTIONS) -> complex:
    """Partial derivative of X in z1."""
    a, b = p.a, p.b
    return eval_x(p.shifted(2, 1), z, opts=opts).value / (a * b * (a + 1))


def dx_d3(p: SeriesParams, z: TripleArg, opts: SeriesOptions = DEFAULT_OPTIONS) -> complex:
    """Partial derivative of X in z3."""
    return eval_x(p.shifted(1, 0), z, opts=opts).value / p.a


def dx_d2(p: SeriesParams, z: TripleArg, opts: SeriesOptions = DEFAULT_OPTIONS) -> SeriesResult:
    """Partial derivative of X in z2 as a single sum of entire double series."""
    _check_x_params(p)
    a, b = p.a, p.b
    z1, z2, z3 = z.z1, z.z2, z.z3
    # c_n = n z2^{n-1} / ((a)_n (b)_n), starting at n = 1
    first = 1 / (a * b)
    ratio = lambda n: (n + 1) * z2 / (n * (a + n) * (b + n))
    inner = lambda n: kampe_de_feriet_x(a + n, b + n, z1, z3, opts)
    res = _outer_sum(ratio, inner, opts, "dX/dz2", start=1)
    return SeriesResult(first * res.value, res.terms_used, abs(first) * res.est_error, res.representation)


# ---------------------------------------------------------------------------
# X'

def _xp2_bound(t: float) -> float:
    if t == 0:
        return math.inf
    return (1 + math.sqrt(1 - 4 * t)) / (2 * t)


def _near(x: float, y: float) -> bool:
    return abs(x - y) <= REGION_MARGIN * max(1.0, abs(y))


def classify_xprime_region(z: TripleArg, p: SeriesParams) -> set:
    """Representations of X' whose convergence conditions hold at ``z``.

    Boundary cases with the parameter side condition are included; use
    :func:`boundary_reps` to see which of them sit on a boundary.
    """
    return set(_classify(z, p))


def _classify(z: TripleArg, p: SeriesParams) -> dict:
    """Map admissible representation -> True when on a boundary."""
    t1, t2 = abs(z.z1), abs(z.z2)
    out = {}
    q = 0.25 - REGION_MARGIN
    if t2 < 2 - REGION_MARGIN:
        if t1 < q:
            out[Rep.XP1] = False
        elif _near(t1, 0.25) and (p.a - p.b - 0.5).real < 0:
            out[Rep.XP1] = True
    if t1 < q:
        bound = _xp2_bound(t1)
        if t2 < bound * (1 - REGION_MARGIN):
            out[Rep.XP2] = False
        elif _near(t2, bound) and (p.a - p.b).real < 0:
            out[Rep.XP2] = True
    if h3_region_fraction(t1, t1 * t2) < 1 - REGION_MARGIN:
        out[Rep.XP3] = False
    return out


def boundary_reps(z: TripleArg, p: SeriesParams) -> set:
    return {r for r, edge in _classify(z, p).items() if edge}


def xprime_rep_rates(z: TripleArg) -> dict:
    """Leading geometric ratio of the slowest component of each representation."""
    t1, t2 = abs(z.z1), abs(z.z2)
    q = math.sqrt(max(0.0, 1 - 4 * t1))
    return {
        Rep.XP2: max(4 * t1, t2 * 2 * t1 / (1 + q)),
        Rep.XP1: max(4 * t1, t2 / 2),
        Rep.XP3: h3_region_fraction(t1, t1 * t2),
    }


def choose_xprime_rep(z: TripleArg, p: SeriesParams) -> Rep:
    admissible = _classify(z, p)
    if not admissible:
        raise OutOfRegion(
            f"X' has no convergent representation at |z1|={abs(z.z1):.6g}, |z2|={abs(z.z2):.6g}")
    rates = xprime_rep_rates(z)
    # interior choices beat boundary ones; dict order breaks ties: Xp2, Xp1, Xp3
    return min((r for r in rates if r in admissible), key=lambda r: (admissible[r], rates[r]))


def eval_x_prime(p: SeriesParams, z: TripleArg, rep: Rep = Rep.AUTO,
                 opts: SeriesOptions = DEFAULT_OPTIONS) -> SeriesResult:
    """Triple series X'(a, b; z1, z2, z3) inside one of its convergence regions."""
    _check_xp_params(p)
    rep = Rep(rep)
    admissible = _classify(z, p)
    if rep == Rep.AUTO:
        rep = choose_xprime_rep(z, p)
    if rep not in XP_REPS:
        raise ValueError(f"{rep} is not a representation of X'")
    if rep not in admissible:
        raise OutOfRegion(f"{rep.value} does not converge at |z1|={abs(z.z1):.6g}, |z2|={abs(z.z2):.6g}")
    a, b = p.a, p.b
    z1, z2, z3 = z.z1, z.z2, z.z3
    if rep == Rep.XP1:
        ratio = lambda n: z1 * (a + 2 * n) * (a + 2 * n + 1) / ((n + 1) * (b + n))
        inner = lambda n: humbert_xi2(1, -n, 1 - a - 2 * n, z2, -z3, opts)
    elif rep == Rep.XP2:
        ratio = lambda n: z1 * z2 * (a + n) / (b + n)
        inner = lambda n: horn_h10(a + n, b + n, z1, z3, opts)
    else:
        ratio = lambda n: -z3 / ((n + 1) * (1 - a + n))
        inner = lambda n: horn_h3(a - n, 1, b, z1, z1 * z2, opts)
    res = _outer_sum(ratio, inner, opts, rep.value)
    if admissible[rep]:
        res = SeriesResult(res.value, res.terms_used, res.est_error, res.representation, True)
    return res


def dxp_d3(p: SeriesParams, z: TripleArg, rep: Rep = Rep.AUTO,
           opts: SeriesOptions = DEFAULT_OPTIONS) -> complex:
    """Partial derivative of X' in z3."""
    if p.a == 1:
        raise ParameterPole("the z3-derivative of X' is singular at a = 1")
    return eval_x_prime(p.shifted(-1, 0), z, rep, opts).value / (p.a - 1)


def confluence_xprime(p: SeriesParams, z1z2_product: complex, z3: complex,
                      opts: SeriesOptions = DEFAULT_OPTIONS) -> SeriesResult:
    """Limit of X'(a, b; e*z1, z2/e, z3) as e -> 0, a confluent Horn series."""
    _check_xp_params(p)
    res = horn_h3_confluent(p.a, 1, p.b, z1z2_product, z3, opts)
    return SeriesResult(res.value, res.terms_used, res.est_error, "Xp-confluent")
