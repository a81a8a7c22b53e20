"""Green's function of the Rashba Hamiltonian in three dimensions.

The resolvent kernel is the 2x2 matrix

    [[G2 - beta G1, -alpha D_- G1],
     [alpha D_+ G1,  G2 + beta G1]],     D_pm = d/dx1 +- i d/dx2,

with scalar kernels G1, G2 that depend on r = |x|.  They are assembled
from X at u = (beta^2 r^4/64, -alpha^2 r^2/16, -zeta r^2/4) and X' at
v = (beta^2/(4 zeta^2), -zeta alpha^2/beta^2, zeta r^2/4).  Closed forms
take over when alpha, beta or r vanish.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InvalidZeta, NoValidRegion, OriginNotAllowed, OutOfRegion
from .series_engine import (
    DEFAULT_OPTIONS, REGION_MARGIN, SeriesOptions, SeriesResult, h3_region_fraction,
    h10_reduced, horn_h3,
)
from .xy_series import (
    Rep, SeriesParams, TripleArg, confluence_xprime, dx_d2, eval_x, eval_x_prime,
)

EPS0 = 1e-10
RESOLVENT_MARGIN = 1e-9
METHODS = ("auto", "series", "closed", "reduced")

_REP_ALIASES = {
    "auto": Rep.AUTO, "a": Rep.XP1, "b": Rep.XP2, "c": Rep.XP3,
    "xp1": Rep.XP1, "xp2": Rep.XP2, "xp3": Rep.XP3,
}


def as_rep(rep) -> Rep:
    if isinstance(rep, Rep):
        return rep
    try:
        return _REP_ALIASES[str(rep).lower()]
    except KeyError:
        raise ValueError(f"unknown representation {rep!r}") from None


# ---------------------------------------------------------------------------
# parameters

def sigma_threshold(alpha: float, beta: float) -> float:
    """Bottom of the essential spectrum is ``-sigma``."""
    if alpha < 0 or beta < 0:
        raise ValueError("alpha and beta must be nonnegative")
    if alpha == 0 or beta > alpha * alpha / 2:
        return float(beta)
    return (beta / alpha) ** 2 + (alpha / 2) ** 2


def spectrum_distance(alpha: float, beta: float, zeta: complex) -> float:
    """Distance from ``zeta`` to the half-line ``[-sigma, inf)``."""
    zeta = complex(zeta)
    s = sigma_threshold(alpha, beta)
    if zeta.real >= -s:
        return abs(zeta.imag)
    return abs(zeta + s)


def in_resolvent_set(alpha: float, beta: float, zeta: complex,
                     margin: float = RESOLVENT_MARGIN) -> bool:
    return spectrum_distance(alpha, beta, zeta) > margin


@dataclass(frozen=True)
class PhysicalParams:
    """Spin-orbit strength ``alpha``, field ``beta`` and spectral parameter ``zeta``."""

    alpha: float
    beta: float
    zeta: complex

    def __post_init__(self):
        alpha, beta = float(self.alpha), float(self.beta)
        zeta = complex(self.zeta)
        if not (math.isfinite(alpha) and math.isfinite(beta) and cmath.isfinite(zeta)):
            raise ValueError("parameters must be finite")
        if alpha < 0 or beta < 0:
            raise ValueError("alpha and beta must be nonnegative")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "zeta", zeta)
        if not in_resolvent_set(alpha, beta, zeta):
            raise InvalidZeta(
                f"zeta={zeta} lies in (or within {RESOLVENT_MARGIN:g} of) the essential "
                f"spectrum [-{self.sigma:g}, inf)")

    @property
    def sigma(self) -> float:
        return sigma_threshold(self.alpha, self.beta)

    @property
    def sqrt_mz(self) -> complex:
        return cmath.sqrt(-self.zeta)

    def conj(self) -> "PhysicalParams":
        return PhysicalParams(self.alpha, self.beta, self.zeta.conjugate())


@dataclass(frozen=True)
class EvalPoint:
    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        for name in ("x1", "x2", "x3"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)

    @property
    def r(self) -> float:
        return math.hypot(self.x1, self.x2, self.x3)

    @classmethod
    def on_axis(cls, r: float) -> "EvalPoint":
        return cls(0.0, 0.0, r)

    @classmethod
    def coerce(cls, x) -> "EvalPoint":
        if isinstance(x, EvalPoint):
            return x
        if np.isscalar(x):
            return cls.on_axis(float(x))
        return cls(*x)


@dataclass(frozen=True)
class GreenMatrix:
    g11: complex
    g12: complex
    g21: complex
    g22: complex

    def as_array(self) -> np.ndarray:
        return np.array([[self.g11, self.g12], [self.g21, self.g22]], dtype=complex)

    @classmethod
    def from_array(cls, m) -> "GreenMatrix":
        m = np.asarray(m, dtype=complex)
        return cls(complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]))


@dataclass(frozen=True)
class TheoremConditions:
    a: bool
    b: bool
    c: bool

    def any(self) -> bool:
        return self.a or self.b or self.c

    def reps(self) -> list:
        return [rep for rep, ok in zip((Rep.XP1, Rep.XP2, Rep.XP3), (self.a, self.b, self.c)) if ok]


def _lt(x: float, y: float) -> bool:
    return x < y * (1 - REGION_MARGIN)


def condition_flags(alpha: float, beta: float, zeta: complex) -> TheoremConditions:
    """Conditions (a), (b), (c) on |zeta| under which X'(v) converges.

    Only ``|zeta|`` enters, so this also works for unvalidated input.
    """
    al, be, t = float(alpha), float(beta), abs(complex(zeta))
    s = sigma_threshold(al, be)
    upper = math.inf if al == 0 else 2 * (be / al) ** 2
    cond_a = 2 * be > al * al and be * (1 - REGION_MARGIN) <= t and _lt(t, upper)
    cond_b = _lt(s, t) or (abs(t - s) <= REGION_MARGIN * max(1.0, s) and 2 * be < al * al)
    # |v1| < R and |v1 v2| < S on the cone R + (S - 1/2)^2 = 1/4
    cond_c = t > 0 and h3_region_fraction(be * be / (4 * t * t), al * al / (4 * t)) < 1 - REGION_MARGIN
    return TheoremConditions(cond_a, cond_b, bool(cond_c))


def theorem_flags(p: PhysicalParams) -> TheoremConditions:
    return condition_flags(p.alpha, p.beta, p.zeta)


def theorem_conditions(p: PhysicalParams) -> TheoremConditions:
    flags = theorem_flags(p)
    if not flags.any():
        raise NoValidRegion(
            f"no series representation converges for alpha={p.alpha:g}, beta={p.beta:g}, zeta={p.zeta}")
    return flags


def v_triple(p: PhysicalParams, r: float) -> TripleArg:
    z = p.zeta
    return TripleArg(p.beta**2 / (4 * z * z), -z * p.alpha**2 / p.beta**2, z * r * r / 4)


def u_triple(p: PhysicalParams, r: float) -> TripleArg:
    return TripleArg(p.beta**2 * r**4 / 64, -p.alpha**2 * r**2 / 16, -p.zeta * r**2 / 4)


# ---------------------------------------------------------------------------
# helpers

def _closed(value: complex, tag: str) -> SeriesResult:
    return SeriesResult(complex(value), 0, 0.0, tag)


def _combine(parts: Iterable, tag: str | None = None) -> SeriesResult:
    value, terms, err, tags, slow = 0j, 0, 0.0, [], False
    for coef, res in parts:
        value += coef * res.value
        terms += res.terms_used
        err += abs(coef) * res.est_error
        tags.append(res.representation)
        slow = slow or res.slow_convergence
    rep = tag if tag is not None else "+".join(dict.fromkeys(t for t in tags if t))
    if not cmath.isfinite(value):
        raise OutOfRegion("non-finite Green's function value")
    return SeriesResult(value, terms, err, rep, slow)


def _check_method(method: str):
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")


def _xprime_v(a: float, b: float, p: PhysicalParams, r: float, rep: Rep,
              opts: SeriesOptions) -> SeriesResult:
    """X'(a, b; v) or, for vanishing beta, its confluent limit."""
    params = SeriesParams(a, b)
    rep = as_rep(rep)
    if p.beta < EPS0:
        if rep != Rep.AUTO and rep not in theorem_flags(p).reps():
            raise NoValidRegion(f"condition for {rep.value} fails at zeta={p.zeta}")
        prod = -p.alpha**2 / (4 * p.zeta)
        if not abs(prod) < 1 - REGION_MARGIN:
            raise NoValidRegion(f"alpha^2/(4|zeta|) = {abs(prod):.6g} is not below 1")
        return confluence_xprime(params, prod, p.zeta * r * r / 4, opts)
    try:
        return eval_x_prime(params, v_triple(p, r), rep, opts)
    except NoValidRegion:
        raise
    except OutOfRegion as exc:
        raise NoValidRegion(str(exc)) from exc


def _s_pair(p: PhysicalParams):
    s1 = cmath.sqrt(-p.beta - p.zeta)
    s2 = cmath.sqrt(p.beta - p.zeta)
    return s1, s2, 2 * p.beta / (s1 + s2)


def _expm1_ratio(r: float, delta: complex) -> complex:
    """``expm1(-r delta) / delta``, finite as delta -> 0."""
    if delta == 0:
        return -r
    return complex(np.expm1(-r * delta)) / delta


# ---------------------------------------------------------------------------
# G1

def _g1_alpha0(r: float, p: PhysicalParams) -> complex:
    if p.beta < EPS0:
        s = p.sqrt_mz
        return cmath.exp(-r * s) / (8 * math.pi * s)
    s1, s2, delta = _s_pair(p)
    return -cmath.exp(-r * s1) * _expm1_ratio(r, delta) * (2 / (s1 + s2)) / (8 * math.pi * r)


def g1_result(x, p: PhysicalParams, rep="auto", method: str = "auto",
              opts: SeriesOptions = DEFAULT_OPTIONS) -> SeriesResult:
    _check_method(method)
    r = EvalPoint.coerce(x).r
    if r < EPS0:
        return g1_at_origin_result(p, "series" if method == "series" else "closed", opts)
    small_a, small_b = p.alpha < EPS0, p.beta < EPS0
    if method in ("auto", "closed"):
        if small_a:
            return _closed(_g1_alpha0(r, p), "closed:free" if small_b else "closed:alpha0")
        if method == "closed":
            raise ValueError("no closed form for G1 with alpha > 0")
    sq = p.sqrt_mz
    xu = eval_x(SeriesParams(1.5, 1.5), u_triple(p, r), opts=opts)
    if method == "reduced":
        if not small_a or small_b:
            raise ValueError("the reduced form needs alpha = 0 < beta")
        v = v_triple(p, r)
        if not abs(v.z1) < 0.25 - REGION_MARGIN:
            raise NoValidRegion("the reduced form needs |zeta| > beta")
        xp = _closed(h10_reduced(0.5, 1.5, v.z1, v.z3, opts), "H10-0F1")
    else:
        theorem_conditions(p)
        xp = _xprime_v(0.5, 1.5, p, r, rep, opts)
    return _combine([(1 / (8 * math.pi * sq), xp), (-r / (8 * math.pi), xu)])


def g1(x, p: PhysicalParams, rep="auto", method: str = "auto",
       opts: SeriesOptions = DEFAULT_OPTIONS) -> complex:
    """Scalar kernel G1 at the point ``x`` (or radius)."""
    return g1_result(x, p, rep, method, opts).value


def _origin_pieces(p: PhysicalParams):
    z = p.zeta
    q = cmath.sqrt(1 - p.beta**2 / z**2)
    rho = cmath.sqrt(-1 / (2 * z * (1 + q)))
    return q, rho


def g1_at_origin_result(p: PhysicalParams, method: str = "closed",
                        opts: SeriesOptions = DEFAULT_OPTIONS) -> SeriesResult:
    if method in ("auto", "closed"):
        q, rho = _origin_pieces(p)
        w = p.alpha * rho
        if abs(w) < 1e-8:
            # artanh(w)/w = 1 + w^2/3 + w^4/5 + ...
            value = rho * (1 + w * w / 3 + w**4 / 5) / (4 * math.pi)
        else:
            value = cmath.atanh(w) / (4 * math.pi * p.alpha)
        return _closed(value, "closed:origin")
    if method != "series":
        raise ValueError(f"unsupported method {method!r} at the origin")
    if not theorem_flags(p).c:
        raise NoValidRegion("the origin series needs condition (c)")
    z = p.zeta
    h = horn_h3(0.5, 1, 1.5, p.beta**2 / (4 * z * z), -p.alpha**2 / (4 * z), opts)
    return _combine([(1 / (8 * math.pi * p.sqrt_mz), h)])


def g1_at_origin(p: PhysicalParams, method: str = "closed",
                 opts: SeriesOptions = DEFAULT_OPTIONS) -> complex:
    return g1_at_origin_result(p, method, opts).value


# ---------------------------------------------------------------------------
# G2

def _free_g2(r: float, p: PhysicalParams) -> complex:
    return cmath.exp(-r * p.sqrt_mz) / (4 * math.pi * r)


def _g2_alpha0(r: float, p: PhysicalParams) -> complex:
    if p.beta < EPS0:
        return _free_g2(r, p)
    s1, s2, _ = _s_pair(p)
    return (cmath.exp(-r * s1) + cmath.exp(-r * s2)) / (8 * math.pi * r)


def g2_result(x, p: PhysicalParams, rep="auto", method: str = "auto",
              opts: SeriesOptions = DEFAULT_OPTIONS) -> SeriesResult:
    _check_method(method)
    r = EvalPoint.coerce(x).r
    if r < EPS0:
        raise OriginNotAllowed("G2 is singular at r = 0; use g2_ren_at_origin")
    small_a, small_b = p.alpha < EPS0, p.beta < EPS0
    if method in ("auto", "closed"):
        if small_a:
            return _closed(_g2_alpha0(r, p), "closed:free" if small_b else "closed:alpha0")
        if method == "closed":
            raise ValueError("no closed form for G2 with alpha > 0")
    sq = p.sqrt_mz
    xu = eval_x(SeriesParams(0.5, 0.5), u_triple(p, r), opts=opts)
    if method == "reduced":
        if not small_a or small_b:
            raise ValueError("the reduced form needs alpha = 0 < beta")
        v = v_triple(p, r)
        if not abs(v.z1) < 0.25 - REGION_MARGIN:
            raise NoValidRegion("the reduced form needs |zeta| > beta")
        xp = _closed(h10_reduced(-0.5, 0.5, v.z1, v.z3, opts), "H10-0F1")
    else:
        theorem_conditions(p)
        xp = _xprime_v(-0.5, 0.5, p, r, rep, opts)
    return _combine([(1 / (4 * math.pi * r), xu), (-sq / (4 * math.pi), xp)])


def g2(x, p: PhysicalParams, rep="auto", method: str = "auto",
       opts: SeriesOptions = DEFAULT_OPTIONS) -> complex:
    """Scalar kernel G2 at the point ``x`` (or radius); singular at r = 0."""
    return g2_result(x, p, rep, method, opts).value


def g2_ren(x, p: PhysicalParams, rep="auto", method: str = "auto",
           opts: SeriesOptions = DEFAULT_OPTIONS) -> complex:
    """G2 minus the free singular part ``exp(-r sqrt(-zeta))/(4 pi r)``."""
    r = EvalPoint.coerce(x).r
    if r < EPS0:
        return g2_ren_at_origin(p, "series" if method == "series" else "closed", opts)
    if method in ("auto", "closed") and p.alpha < EPS0:
        if p.beta < EPS0:
            return 0j
        s1, s2, _ = _s_pair(p)
        s0 = p.sqrt_mz
        return (cmath.exp(-r * s1) + cmath.exp(-r * s2) - 2 * cmath.exp(-r * s0)) / (8 * math.pi * r)
    return g2(x, p, rep, method, opts) - _free_g2(r, p)


def g2_ren_at_origin_result(p: PhysicalParams, method: str = "closed",
                            opts: SeriesOptions = DEFAULT_OPTIONS) -> SeriesResult:
    sq = p.sqrt_mz
    if method in ("auto", "closed"):
        q, rho = _origin_pieces(p)
        w = p.alpha * rho
        # 1 - sqrt((1+q)/2) without cancellation
        h = cmath.sqrt((1 + q) / 2)
        one_minus_root = p.beta**2 / (2 * p.zeta**2 * (1 + q)) / (1 + h)
        one_minus_h3 = one_minus_root + p.alpha / (2 * sq) * cmath.atanh(w)
        return _closed(sq / (4 * math.pi) * one_minus_h3, "closed:origin")
    if method != "series":
        raise ValueError(f"unsupported method {method!r} at the origin")
    if not theorem_flags(p).c:
        raise NoValidRegion("the origin series needs condition (c)")
    z = p.zeta
    h = horn_h3(-0.5, 1, 0.5, p.beta**2 / (4 * z * z), -p.alpha**2 / (4 * z), opts)
    return SeriesResult(sq / (4 * math.pi) * (1 - h.value), h.terms_used,
                        abs(sq) / (4 * math.pi) * h.est_error, h.representation)


def g2_ren_at_origin(p: PhysicalParams, method: str = "closed",
                     opts: SeriesOptions = DEFAULT_OPTIONS) -> complex:
    return g2_ren_at_origin_result(p, method, opts).value


# ---------------------------------------------------------------------------
# off-diagonal kernel

def dpm_g1_result(x, p: PhysicalParams, sign: int, rep="auto", method: str = "auto",
                  opts: SeriesOptions = DEFAULT_OPTIONS) -> SeriesResult:
    _check_method(method)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    pt = EvalPoint.coerce(x)
    r = pt.r
    if r < EPS0:
        raise OriginNotAllowed("D+-G1 has a direction-dependent limit at r = 0")
    rho = complex(pt.x1, sign * pt.x2)
    small_a, small_b = p.alpha < EPS0, p.beta < EPS0
    if method in ("auto", "closed"):
        if small_a and small_b:
            return _closed(-rho / r * cmath.exp(-r * p.sqrt_mz) / (8 * math.pi), "closed:free")
        if small_a:
            s1, s2, delta = _s_pair(p)
            bracket = cmath.exp(-r * s2) + (s1 + 1 / r) * cmath.exp(-r * s1) * _expm1_ratio(r, delta)
            return _closed(rho / (8 * math.pi * r * r) * (2 / (s1 + s2)) * bracket, "closed:alpha0")
        if method == "closed":
            raise ValueError("no closed form for D+-G1 with alpha > 0")
    if method == "reduced":
        raise ValueError("no reduced form for D+-G1")
    theorem_conditions(p)
    u = u_triple(p, r)
    z = p.zeta
    xp = _xprime_v(-0.5, 1.5, p, r, rep, opts)
    x33 = eval_x(SeriesParams(1.5, 1.5), u, opts=opts)
    x75 = eval_x(SeriesParams(3.5, 2.5), u, opts=opts)
    x53 = eval_x(SeriesParams(2.5, 1.5), u, opts=opts)
    d2 = dx_d2(SeriesParams(1.5, 1.5), u, opts)
    c = rho / (8 * math.pi)
    return _combine([
        (c * p.sqrt_mz, xp),
        (-c / r, x33),
        (-c * r / 2 * p.beta**2 * r * r / 45, x75),
        (c * r / 2 * 2 * z / 3, x53),
        (c * r / 2 * p.alpha**2 / 4, d2),
    ])


def dpm_g1(x, p: PhysicalParams, sign: int, rep="auto", method: str = "auto",
           opts: SeriesOptions = DEFAULT_OPTIONS) -> complex:
    """``(d/dx1 + sign * i d/dx2) G1`` at ``x``."""
    return dpm_g1_result(x, p, sign, rep, method, opts).value


# ---------------------------------------------------------------------------
# matrix

@dataclass(frozen=True)
class GreenEvaluation:
    """Matrix together with the diagnostics of each scalar kernel."""

    matrix: GreenMatrix
    g1: SeriesResult
    g2: SeriesResult
    dp: SeriesResult | None
    dm: SeriesResult | None


def evaluate(x, p: PhysicalParams, rep="auto", method: str = "auto",
             opts: SeriesOptions = DEFAULT_OPTIONS) -> GreenEvaluation:
    pt = EvalPoint.coerce(x)
    r1 = g1_result(pt, p, rep, method, opts)
    r2 = g2_result(pt, p, rep, method, opts)
    al, be = p.alpha, p.beta
    if al == 0:
        dp = dm = None
        g12 = g21 = 0j
    else:
        dp = dpm_g1_result(pt, p, 1, rep, method, opts)
        dm = dpm_g1_result(pt, p, -1, rep, method, opts)
        g12, g21 = -al * dm.value, al * dp.value
    m = GreenMatrix(r2.value - be * r1.value, g12, g21, r2.value + be * r1.value)
    return GreenEvaluation(m, r1, r2, dp, dm)


def green_matrix(x, p: PhysicalParams, rep="auto", method: str = "auto",
                 opts: SeriesOptions = DEFAULT_OPTIONS) -> GreenMatrix:
    return evaluate(x, p, rep, method, opts).matrix


def to_dresselhaus(m: GreenMatrix, delta: float, n: int) -> GreenMatrix:
    """Conjugate by ``U = (-1)^n exp(i delta) diag(1, i)``: ``U m U^dagger``."""
    u = (-1) ** int(n) * cmath.exp(1j * delta) * np.diag([1, 1j])
    return GreenMatrix.from_array(u @ m.as_array() @ u.conj().T)
