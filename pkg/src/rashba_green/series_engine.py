"""Scalar special functions and adaptive double-series summation.

Every two-variable evaluator builds the term grid ``T[m, n]`` from the
ratios of consecutive terms, then sums it over triangular shells
``m + n = s`` in ascending order.  Summation stops once three
consecutive shells are negligible against the running partial sum.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .errors import DomainError, NoConvergence, OutOfRegion, ParameterPole

TOL_REL = 1e-12
MAX_SHELLS = 2000
REGION_MARGIN = 1e-12
_TINY = 1e-300


@dataclass(frozen=True)
class SeriesResult:
    """Outcome of a truncated series.

    ``est_error`` is the magnitude of the last accepted shell (a heuristic,
    not a bound).  ``terms_used`` counts shells or outer terms.
    """

    value: complex
    terms_used: int
    est_error: float
    representation: str = ""
    slow_convergence: bool = False

    def __complex__(self) -> complex:
        return complex(self.value)


@dataclass(frozen=True)
class SeriesOptions:
    tol: float = TOL_REL
    max_shells: int = MAX_SHELLS
    max_outer: int = MAX_SHELLS

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_shells < 4 or self.max_outer < 4:
            raise ValueError("caps must allow at least four terms")


DEFAULT_OPTIONS = SeriesOptions()


def is_nonpositive_integer(c: complex) -> bool:
    c = complex(c)
    return c.imag == 0 and c.real <= 0 and c.real == math.floor(c.real)


def is_positive_integer(c: complex) -> bool:
    c = complex(c)
    return c.imag == 0 and c.real >= 1 and c.real == math.floor(c.real)


def _check_finite(value: complex, what: str) -> complex:
    if not cmath.isfinite(value):
        raise NoConvergence(f"{what} produced a non-finite value")
    return value


# ---------------------------------------------------------------------------
# scalar functions

def gamma(z: complex) -> complex:
    """Complex gamma function; raises at the poles."""
    z = complex(z)
    if is_nonpositive_integer(z):
        raise DomainError(f"gamma has a pole at {z.real:g}")
    return complex(special.gamma(z))


def pochhammer(a: complex, k: int) -> complex:
    """Rising factorial ``(a)_k`` for any integer ``k``.

    Negative ``k`` gives ``1/((a+k)...(a-1))``; a zero factor there is a
    genuine pole and raises :class:`DomainError`.
    """
    a = complex(a)
    k = int(k)
    if k >= 0:
        out = 1 + 0j
        for i in range(k):
            out *= a + i
        return out
    den = 1 + 0j
    for i in range(1, -k + 1):
        den *= a - i
    if den == 0:
        raise DomainError(f"({a})_{k} is infinite")
    return 1 / den


def rpochhammer(a: complex, k: int) -> complex:
    """``1/(a)_k`` with the value 0 wherever ``(a)_k`` has a pole."""
    a = complex(a)
    k = int(k)
    if k < 0:
        out = 1 + 0j
        for i in range(1, -k + 1):
            out *= a - i
        return out
    p = pochhammer(a, k)
    if p == 0:
        raise DomainError(f"1/({a})_{k} is infinite")
    return 1 / p


def pochhammer_gamma_ratio(a: complex, k: int) -> complex:
    """``Gamma(a+k)/Gamma(a)``; only for cross-checking :func:`pochhammer`."""
    return gamma(complex(a) + k) / gamma(a)


def reciprocal_factorial(n: int) -> float:
    n = int(n)
    if n < 0:
        return 0.0
    if n > 170:
        return math.exp(-math.lgamma(n + 1))
    return 1.0 / math.factorial(n)


def hyp0f1(c: complex, z: complex, opts: SeriesOptions = DEFAULT_OPTIONS) -> SeriesResult:
    """Confluent limit function ``sum z^k / (k! (c)_k)``."""
    c, z = complex(c), complex(z)
    if is_nonpositive_integer(c):
        raise ParameterPole(f"0F1 parameter c={c.real:g} is a pole")
    term = 1 + 0j
    total = 1 + 0j
    small = 0
    cap = max(opts.max_shells, 4 * int(math.sqrt(abs(z))) + 50)
    for k in range(cap):
        term *= z / ((k + 1) * (c + k))
        total += term
        if abs(term) <= opts.tol * abs(total) + _TINY:
            small += 1
            if small == 3:
                return SeriesResult(_check_finite(total, "0F1"), k + 2, abs(term), "0F1")
        else:
            small = 0
    raise NoConvergence("0F1 did not converge")


def macdonald_k_half(order_num: int, z: complex) -> complex:
    """Macdonald function ``K_{order_num + 1/2}(z)`` from its finite form."""
    z = complex(z)
    if z == 0:
        raise DomainError("K_nu is singular at z = 0")
    if z.imag == 0 and z.real < 0:
        raise DomainError("z lies on the branch cut of K_nu")
    n = int(order_num)
    if n < 0:
        n = -n - 1
    term = 1 + 0j
    total = 1 + 0j
    for k in range(n):
        term *= (n + k + 1) * (n - k) / ((k + 1) * 2 * z)
        total += term
    return cmath.sqrt(math.pi / (2 * z)) * cmath.exp(-z) * total


def scaled_macdonald_half(nmax: int, z: complex) -> np.ndarray:
    """Return ``k_j = K_{j+1/2}(z) / (Gamma(j+1/2) (2/z)^(j+1/2))`` for j = 0..nmax.

    The scaling removes the factorial growth in the order, so high orders
    can be used without overflow.  Uses the upward recurrence, which is
    stable for the Macdonald function.
    """
    z = complex(z)
    if z == 0:
        raise DomainError("K_nu is singular at z = 0")
    out = np.empty(nmax + 1, dtype=complex)
    # k_{-1} and k_0 from K_{1/2} = K_{-1/2} = sqrt(pi/2z) e^{-z}
    base = cmath.sqrt(math.pi / (2 * z)) * cmath.exp(-z)
    prev = base / (special.gamma(-0.5) * cmath.sqrt(2 / z) ** -1)
    cur = base / (math.sqrt(math.pi) * cmath.sqrt(2 / z))
    out[0] = cur
    h = (z / 2) ** 2
    for j in range(nmax):
        nu = j + 0.5
        prev, cur = cur, prev * h / (nu * (nu - 1)) + cur
        out[j + 1] = cur
    return out


# ---------------------------------------------------------------------------
# double-series machinery

def _rising(x, d: int):
    """Product of ``d`` consecutive rising factors starting at ``x``; negative
    ``d`` gives the reciprocal of the falling block ``(x-1)...(x+d)``."""
    if d == 0:
        return 1.0
    out = x
    if d > 0:
        for i in range(1, d):
            out = out * (x + i)
        return out
    out = x - 1
    for i in range(2, -d + 1):
        out = out * (x - i)
    return 1.0 / out


def _shell_sums(grid: np.ndarray, size: int) -> np.ndarray:
    idx = np.add.outer(np.arange(grid.shape[0]), np.arange(grid.shape[1])).ravel()
    flat = grid.ravel()
    re = np.bincount(idx, weights=flat.real, minlength=2 * size)
    im = np.bincount(idx, weights=flat.imag, minlength=2 * size)
    return (re + 1j * im)[:size]


def sum_shells(build: Callable[[int], np.ndarray], opts: SeriesOptions = DEFAULT_OPTIONS,
               tag: str = "", start: int = 16) -> SeriesResult:
    """Sum a double series over shells ``m + n = s``.

    ``build(size)`` must return the ``size x size`` grid of terms.  The grid
    is doubled until the stopping rule fires or the shell cap is hit.
    """
    size = min(start, opts.max_shells)
    while True:
        with np.errstate(all="ignore"):
            grid = build(size)
        shells = _shell_sums(grid, size)
        if not np.all(np.isfinite(shells)):
            raise NoConvergence(f"{tag or 'double series'}: non-finite terms")
        partial = np.cumsum(shells)
        small = np.abs(shells) <= opts.tol * np.abs(partial) + _TINY
        run = small[2:] & small[1:-1] & small[:-2]
        hits = np.flatnonzero(run)
        if hits.size:
            s = int(hits[0]) + 2
            return SeriesResult(complex(partial[s]), s + 1, float(abs(shells[s])), tag)
        if size >= opts.max_shells:
            raise NoConvergence(f"{tag or 'double series'}: shell cap {opts.max_shells} reached")
        size = min(2 * size, opts.max_shells)


def _finite_shells(grid: np.ndarray) -> bool:
    """Finiteness of the terms that are summed (shells ``m + n < size``).

    The far corner of the square grid may overflow without harm.
    """
    size = grid.shape[0]
    mask = np.add.outer(np.arange(size), np.arange(grid.shape[1])) < size
    return bool(np.all(np.isfinite(grid[mask])))


def _ratio_grid(z1, z2, col_ratio, row_ratio, size: int) -> np.ndarray:
    """Grid of terms from the n=0 column ratio and the along-row ratio."""
    m = np.arange(size, dtype=float)
    n = np.arange(1, size, dtype=float)
    col = np.ones(size, dtype=complex)
    if size > 1:
        col[1:] = np.cumprod(col_ratio(m[1:] - 1) * z1 / m[1:])
    grid = np.empty((size, size), dtype=complex)
    grid[:, 0] = col
    if size > 1:
        rr = row_ratio(m[:, None], n[None, :] - 1) * z2 / n[None, :]
        grid[:, 1:] = col[:, None] * np.cumprod(rr, axis=1)
    return grid


@dataclass(frozen=True)
class Factor:
    """Pochhammer factor ``(param)_{w1*m + w2*n}``; weights may be negative."""

    param: complex
    w1: int = 1
    w2: int = 1


@dataclass(frozen=True)
class SDSpec:
    """Two-variable Srivastava-Daoust style series

    ``sum prod(num)/prod(den) z1^m z2^n / (m! n!)`` where each factor is a
    Pochhammer symbol with integer index weights.  Single-variable factors
    are factors with a zero weight.
    """

    numerator: tuple[Factor, ...] = ()
    denominator: tuple[Factor, ...] = ()
    name: str = "SD"

    @staticmethod
    def of(numerator: Sequence = (), denominator: Sequence = (), name: str = "SD") -> "SDSpec":
        conv = lambda fs: tuple(f if isinstance(f, Factor) else Factor(*f) for f in fs)
        return SDSpec(conv(numerator), conv(denominator), name)

    def excess(self) -> tuple[int, int]:
        """``1 + sum(den weights) - sum(num weights)`` for each variable."""
        d1 = 1 + sum(f.w1 for f in self.denominator) - sum(f.w1 for f in self.numerator)
        d2 = 1 + sum(f.w2 for f in self.denominator) - sum(f.w2 for f in self.numerator)
        return d1, d2

    def is_entire(self) -> bool:
        """True when the series converges for all finite arguments.

        The weight-excess test is only valid for nonnegative weights.
        """
        weights = [w for f in self.numerator + self.denominator for w in (f.w1, f.w2)]
        if any(w < 0 for w in weights):
            return False
        return all(d > 0 for d in self.excess())

    def term(self, m: int, n: int) -> complex:
        """Single term without the power/factorial part, by direct products."""
        out = 1 + 0j
        for f in self.numerator:
            out *= pochhammer(f.param, f.w1 * m + f.w2 * n)
        for f in self.denominator:
            out *= rpochhammer(f.param, f.w1 * m + f.w2 * n)
        return out


def _check_denominators(factors, what: str):
    for f in factors:
        if is_nonpositive_integer(f.param) and (f.w1 > 0 or f.w2 > 0):
            raise ParameterPole(f"{what}: denominator parameter {complex(f.param).real:g} is a pole")


def _sd_ratio_grid(spec: SDSpec, z1: complex, z2: complex, size: int) -> np.ndarray:
    def col_ratio(m):
        r = np.ones_like(m, dtype=complex)
        for f in spec.numerator:
            r = r * _rising(f.param + f.w1 * m, f.w1)
        for f in spec.denominator:
            r = r / _rising(f.param + f.w1 * m, f.w1)
        return r

    def row_ratio(m, n):
        r = np.ones(np.broadcast(m, n).shape, dtype=complex)
        for f in spec.numerator:
            r = r * _rising(f.param + f.w1 * m + f.w2 * n, f.w2)
        for f in spec.denominator:
            r = r / _rising(f.param + f.w1 * m + f.w2 * n, f.w2)
        return r

    return _ratio_grid(z1, z2, col_ratio, row_ratio, size)


def _direct_table(param: complex, lo: int, hi: int, reciprocal: bool) -> np.ndarray:
    """``(param)_k`` (or its reciprocal) for k = lo..hi by exact recursion."""
    out = np.empty(hi - lo + 1, dtype=complex)
    for i, k in enumerate(range(lo, hi + 1)):
        try:
            out[i] = rpochhammer(param, k) if reciprocal else pochhammer(param, k)
        except DomainError:
            out[i] = np.inf
    return out


def _sd_direct_grid(spec: SDSpec, z1: complex, z2: complex, size: int) -> np.ndarray:
    """Exact per-term grid; used when a term ratio is 0/0 or infinite."""
    m = np.arange(size)[:, None]
    n = np.arange(size)[None, :]
    pw1 = np.concatenate([[1.0], np.cumprod(z1 / np.arange(1, size))])
    pw2 = np.concatenate([[1.0], np.cumprod(z2 / np.arange(1, size))])
    grid = pw1[:, None] * pw2[None, :] * np.ones((size, size), dtype=complex)
    summed = (m + n) < size
    for group, recip in ((spec.numerator, False), (spec.denominator, True)):
        for f in group:
            idx = f.w1 * m + f.w2 * n
            lo, hi = int(idx.min()), int(idx.max())
            table = _direct_table(f.param, lo, hi, recip)
            vals = table[idx - lo]
            if not recip and np.any(np.isinf(vals) & (grid != 0) & summed):
                raise DomainError(f"{spec.name}: numerator Pochhammer pole")
            grid = np.where(grid == 0, 0, grid * vals)
    return grid


def _sd_build(spec: SDSpec, z1: complex, z2: complex) -> Callable[[int], np.ndarray]:
    def build(size):
        grid = _sd_ratio_grid(spec, z1, z2, size)
        if not _finite_shells(grid):
            grid = _sd_direct_grid(spec, z1, z2, size)
        return grid
    return build


def srivastava_daoust(spec: SDSpec, z1: complex, z2: complex, *,
                      assume_convergent: bool = False,
                      opts: SeriesOptions = DEFAULT_OPTIONS) -> SeriesResult:
    """Evaluate a two-variable series described by ``spec``.

    Series that are not provably entire by weight bookkeeping are refused
    unless the caller asserts convergence (region checked elsewhere).
    """
    z1, z2 = complex(z1), complex(z2)
    _check_denominators(spec.denominator, spec.name)
    if not (assume_convergent or spec.is_entire()):
        raise OutOfRegion(f"{spec.name}: convergence is not guaranteed by the weights; "
                          "pass assume_convergent=True after checking the region")
    if z1 == 0 and z2 == 0:
        return SeriesResult(1 + 0j, 1, 0.0, spec.name)
    return sum_shells(_sd_build(spec, z1, z2), opts, spec.name)


def kampe_de_feriet_x(a: complex, b: complex, z1: complex, z2: complex,
                      opts: SeriesOptions = DEFAULT_OPTIONS) -> SeriesResult:
    """``sum z1^r z2^s / (r! s! (a)_{2r+s} (b)_r)``, the entire series on the
    right of the X recurrence."""
    spec = SDSpec.of((), [(a, 2, 1), (b, 1, 0)], "KdF")
    return srivastava_daoust(spec, z1, z2, opts=opts)


# ---------------------------------------------------------------------------
# Horn and Humbert series

def h3_region_fraction(x: float, y: float) -> float:
    """Smallest t with (x/t, y/t) on the boundary of the H3 region.

    Values below one mean the point is inside.  The region is
    ``y < 1`` and ``x < 1/4`` for ``y <= 1/2``, ``x < y(1-y)`` otherwise.
    """
    if x == 0 and y == 0:
        return 0.0

    def inside(t):
        X, Y = x / t, y / t
        if Y >= 1:
            return False
        return X < (0.25 if Y <= 0.5 else Y * (1 - Y))

    lo, hi = 0.0, 1.0
    while not inside(hi):
        hi *= 2
        if hi > 1e300:
            return math.inf
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mid == 0 or not inside(mid):
            lo = mid
        else:
            hi = mid
    return hi


def in_h3_region(z1: complex, z2: complex, margin: float = REGION_MARGIN) -> bool:
    return h3_region_fraction(abs(z1), abs(z2)) < 1 - margin


def horn_h3(a, b, c, z1, z2, opts: SeriesOptions = DEFAULT_OPTIONS) -> SeriesResult:
    """``sum (a)_{2m+n} (b)_n / (c)_{m+n} z1^m z2^n / (m! n!)``."""
    a, b, c, z1, z2 = map(complex, (a, b, c, z1, z2))
    if is_nonpositive_integer(c):
        raise ParameterPole(f"H3: c={c.real:g} is a pole")
    if not in_h3_region(z1, z2):
        raise OutOfRegion(f"H3: ({abs(z1):.6g}, {abs(z2):.6g}) outside the convergence region")
    if z1 == 0 and z2 == 0:
        return SeriesResult(1 + 0j, 1, 0.0, "H3")
    spec = SDSpec.of([(a, 2, 1), (b, 0, 1)], [(c, 1, 1)], "H3")

    def build(size):
        grid = _ratio_grid(
            z1, z2,
            lambda m: (a + 2 * m) * (a + 2 * m + 1) / (c + m),
            lambda m, n: (a + 2 * m + n) * (b + n) / (c + m + n),
            size)
        if not _finite_shells(grid):
            grid = _sd_direct_grid(spec, z1, z2, size)
        return grid

    return sum_shells(build, opts, "H3")


def horn_h3_confluent(a, b, c, z1, z2, opts: SeriesOptions = DEFAULT_OPTIONS) -> SeriesResult:
    """``sum (a)_{m-n} (b)_m / (c)_m z1^m z2^n / (m! n!)``; needs ``|z1| < 1``."""
    a, b, c, z1, z2 = map(complex, (a, b, c, z1, z2))
    if is_nonpositive_integer(c):
        raise ParameterPole(f"confluent H3: c={c.real:g} is a pole")
    if not abs(z1) < 1 - REGION_MARGIN:
        raise OutOfRegion(f"confluent H3 needs |z1| < 1, got {abs(z1):.6g}")
    if z1 == 0 and z2 == 0:
        return SeriesResult(1 + 0j, 1, 0.0, "H3c")
    spec = SDSpec.of([(a, 1, -1), (b, 1, 0)], [(c, 1, 0)], "H3c")

    def build(size):
        grid = _ratio_grid(
            z1, z2,
            lambda m: (a + m) * (b + m) / (c + m),
            lambda m, n: 1 / (a + m - n - 1),
            size)
        if not _finite_shells(grid):
            grid = _sd_direct_grid(spec, z1, z2, size)
        return grid

    return sum_shells(build, opts, "H3c")


def horn_h10(a, c, z1, z2, opts: SeriesOptions = DEFAULT_OPTIONS) -> SeriesResult:
    """``sum (a)_{2m-n} / (c)_m z1^m z2^n / (m! n!)``; needs ``|z1| < 1/4``."""
    a, c, z1, z2 = map(complex, (a, c, z1, z2))
    if is_nonpositive_integer(c):
        raise ParameterPole(f"H10: c={c.real:g} is a pole")
    if not abs(z1) < 0.25 - REGION_MARGIN:
        raise OutOfRegion(f"H10 needs |z1| < 1/4, got {abs(z1):.6g}")
    if z1 == 0 and z2 == 0:
        return SeriesResult(1 + 0j, 1, 0.0, "H10")
    spec = SDSpec.of([(a, 2, -1)], [(c, 1, 0)], "H10")

    def build(size):
        grid = _ratio_grid(
            z1, z2,
            lambda m: (a + 2 * m) * (a + 2 * m + 1) / (c + m),
            lambda m, n: 1 / (a + 2 * m - n - 1),
            size)
        if not _finite_shells(grid):
            grid = _sd_direct_grid(spec, z1, z2, size)
        return grid

    return sum_shells(build, opts, "H10")


def humbert_xi2(a, b, c, z1, z2, opts: SeriesOptions = DEFAULT_OPTIONS) -> SeriesResult:
    """``sum (a)_m (b)_m / (c)_{m+n} z1^m z2^n / (m! n!)``.

    Needs ``|z1| < 1`` unless ``b`` is a nonpositive integer, in which case
    the sum over ``m`` terminates.
    """
    a, b, c, z1, z2 = map(complex, (a, b, c, z1, z2))
    if is_nonpositive_integer(c):
        raise ParameterPole(f"Xi2: c={c.real:g} is a pole")
    terminating = is_nonpositive_integer(b) or is_nonpositive_integer(a)
    if not (terminating or abs(z1) < 1 - REGION_MARGIN):
        raise OutOfRegion(f"Xi2 needs |z1| < 1, got {abs(z1):.6g}")
    if z1 == 0 and z2 == 0:
        return SeriesResult(1 + 0j, 1, 0.0, "Xi2")
    spec = SDSpec.of([(a, 1, 0), (b, 1, 0)], [(c, 1, 1)], "Xi2")

    def build(size):
        grid = _ratio_grid(
            z1, z2,
            lambda m: (a + m) * (b + m) / (c + m),
            lambda m, n: 1 / (c + m + n),
            size)
        if not _finite_shells(grid):
            grid = _sd_direct_grid(spec, z1, z2, size)
        return grid

    return sum_shells(build, opts, "Xi2")


def h10_reduced(a: float, c: float, z1: complex, z2: complex,
                opts: SeriesOptions = DEFAULT_OPTIONS) -> complex:
    """H10 through two 0F1 terms, for the parameter pairs where it collapses.

    Supported pairs are (1/2, 3/2), (-1/2, 1/2) and (-1/2, 3/2).
    """
    z1, z2 = complex(z1), complex(z2)
    if not abs(z1) < 0.25 - REGION_MARGIN:
        raise OutOfRegion(f"H10 needs |z1| < 1/4, got {abs(z1):.6g}")
    key = (float(a), float(c))
    if z1 == 0:
        return horn_h10(a, c, z1, z2, opts).value
    s = cmath.sqrt(z1)
    total = 0j
    for sg in (1, -1):
        w = 1 + 2 * sg * s
        if key == (0.5, 1.5):
            total += sg * cmath.sqrt(w) / (2 * s) * hyp0f1(1.5, -z2 * w, opts).value
        elif key == (-0.5, 0.5):
            total += cmath.sqrt(w) / 2 * hyp0f1(1.5, -z2 * w, opts).value
        elif key == (-0.5, 1.5):
            total += sg * w ** 1.5 / (6 * s) * hyp0f1(2.5, -z2 * w, opts).value
        else:
            raise ValueError(f"no reduction for H10 with (a, c) = {key}")
    return total
