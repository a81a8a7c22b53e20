"""Independent reference values for the series evaluators.

Three routes that share no code with the single-sum representations:

* adaptive quadrature of the momentum-space integrals with x on the
  third axis,
* double sums of half-integer Macdonald functions,
* brute-force truncation of the defining triple sums.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import NoConvergence, OutOfRegion, QuadFailure
from .greens import PhysicalParams
from .series_engine import macdonald_k_half, scaled_macdonald_half
from .xy_series import SeriesParams, TripleArg, classify_xprime_region, eval_x, eval_x_prime

_TINY = 1e-300


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-13
    rel_tol: float = 1e-11
    max_subdivisions: int = 400
    radial_map_scale: float | None = None  # defaults to max(1, sqrt|zeta|)

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")

    def halved(self) -> "QuadratureConfig":
        return QuadratureConfig(self.abs_tol / 2, self.rel_tol / 2, self.max_subdivisions,
                                self.radial_map_scale)


@dataclass(frozen=True)
class MacdonaldSumArgs:
    x: complex
    y: complex
    z: complex

    @classmethod
    def from_physical(cls, r: float, p: PhysicalParams) -> "MacdonaldSumArgs":
        sq = p.sqrt_mz
        return cls(-p.beta**2 * r * r / (4 * p.zeta), 2 * p.alpha**2 * sq / (p.beta**2 * r), r * sq)


# ---------------------------------------------------------------------------
# quadrature

def _quad(f, a, b, cfg: QuadratureConfig, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                                      limit=cfg.max_subdivisions, **kw)
        except integrate.IntegrationWarning as exc:
            raise QuadFailure(str(exc).strip().splitlines()[0]) from exc
    return val, err


def _radial(f, w: float, L: float, cfg: QuadratureConfig):
    """``int_0^inf f(k) cos(w k) dk`` for a real integrand decaying like 1/k^2."""
    if w * L > 1e-8:
        return _quad(f, 0, np.inf, cfg, weight="cos", wvar=w, limlst=200)
    # negligible oscillation: map k = L t/(1-t) onto (0, 1)
    g = lambda t: f(L * t / (1 - t)) * L / (1 - t) ** 2 if t < 1 else 0.0
    return _quad(g, 0, 1, cfg)


def _momentum_integral(r: float, p: PhysicalParams, cfg: QuadratureConfig, integrand):
    """``(1/(2 pi^2)) int_0^1 du int_0^inf dk cos(k r u) integrand(k, u)``."""
    L = cfg.radial_map_scale or max(1.0, math.sqrt(abs(p.zeta)))
    parts = (0, 1) if p.zeta.imag != 0 else (0,)
    inner_err = [0.0]

    def inner(u, part):
        f = (lambda k: integrand(k, u).real) if part == 0 else (lambda k: integrand(k, u).imag)
        v, e = _radial(f, r * u, L, cfg)
        inner_err[0] = max(inner_err[0], e)
        return v

    total, err = 0j, 0.0
    for part in parts:
        v, e = _quad(lambda u: inner(u, part), 0, 1, cfg)
        total += v if part == 0 else 1j * v
        err += e
    scale = 1 / (2 * math.pi**2)
    return total * scale, (err + inner_err[0] * len(parts)) * scale


def _q(k, u, p: PhysicalParams):
    s = k * k
    return (s - p.zeta) ** 2 - p.alpha**2 * s * (1 - u * u) - p.beta**2


def quad_g1(r: float, p: PhysicalParams, cfg: QuadratureConfig | None = None,
            full_output: bool = False):
    """G1 at x = (0, 0, r) by nested adaptive quadrature.

    The angular variable is u = cos(theta); the radial integral uses a
    Fourier-weighted rule on [0, inf).  With ``full_output`` the error
    estimate is returned as well.
    """
    cfg = cfg or QuadratureConfig()
    if r < 0:
        raise ValueError("r must be nonnegative")
    val, err = _momentum_integral(r, p, cfg, lambda k, u: k * k / _q(k, u, p))
    return (val, err) if full_output else val


def quad_g2(r: float, p: PhysicalParams, cfg: QuadratureConfig | None = None,
            full_output: bool = False):
    """G2 at x = (0, 0, r); the free part is subtracted and added back exactly."""
    cfg = cfg or QuadratureConfig()
    if not r > 0:
        raise ValueError("G2 needs r > 0")
    al2, be2, z = p.alpha**2, p.beta**2, p.zeta

    def integrand(k, u):
        s = k * k
        # (s - z)/Q - 1/(s - z) with the numerator simplified
        return s * (al2 * s * (1 - u * u) + be2) / (_q(k, u, p) * (s - z))

    val, err = _momentum_integral(r, p, cfg, integrand)
    val += cmath.exp(-r * p.sqrt_mz) / (4 * math.pi * r)
    return (val, err) if full_output else val


# ---------------------------------------------------------------------------
# Macdonald double sums

def _macdonald_sum(x, y, z, kind: int, tol: float, max_m: int) -> complex:
    """``sum_m sum_{n<=m} m! x^m y^n / ((2m+kind)! (m-n)!) K_{2m-n+kind-1/2}(z)``.

    Written through scaled Macdonald values ``k_j`` so that no factorial
    is ever formed: the sum becomes ``(2/z)^(kind-1/2) sum c(m,n) X^m Y^n k``
    with ``X = 4x/z^2`` and ``Y = yz/2``.
    """
    x, y, z = complex(x), complex(y), complex(z)
    if z == 0:
        raise OutOfRegion("z must be nonzero")
    X, XY = 4 * x / (z * z), 2 * x * y / z  # X and X*Y
    kk = scaled_macdonald_half(2 * max_m + 1, z)
    if kind == 1:
        c_m0, shift = math.sqrt(math.pi), 0.5
        grow = lambda m: (2 * m + 0.5) * (2 * m + 1.5) / ((2 * m + 2) * (2 * m + 3))
        step = lambda m, n: (m - n) / (2 * m - n - 0.5)
        kval = lambda j: kk[j]
    else:
        c_m0, shift = -2 * math.sqrt(math.pi), -0.5
        grow = lambda m: (2 * m - 0.5) * (2 * m + 0.5) / ((2 * m + 1) * (2 * m + 2))
        step = lambda m, n: (m - n) / (2 * m - n - 1.5)
        k_minus = macdonald_k_half(0, z) / (-2 * math.sqrt(math.pi) * cmath.sqrt(2 / z) ** -1)
        kval = lambda j: k_minus if j < 0 else kk[j]
    total, small = 0j, 0
    for m in range(max_m + 1):
        shell = 0j
        c = c_m0
        for n in range(m + 1):
            # X^m Y^n written as X^(m-n) (XY)^n
            shell += c * X ** (m - n) * XY**n * kval(2 * m - n - (0 if kind == 1 else 1))
            if n < m:
                c *= step(m, n)
        total += shell
        if not cmath.isfinite(total):
            raise NoConvergence("Macdonald sum overflowed")
        if abs(shell) <= tol * abs(total) + _TINY:
            small += 1
            if small == 3:
                return cmath.sqrt(2 / z) ** (2 * shift) * total
        else:
            small = 0
        c_m0 *= grow(m)
    raise NoConvergence(f"Macdonald sum did not converge within {max_m} shells")


def _lemma_region(x, y, z) -> set:
    return classify_xprime_region(TripleArg(x / (z * z), y * z / 2, 0), SeriesParams(0.5, 1.5))


def macdonald_lemma_lhs(args: MacdonaldSumArgs, kind: int, tol: float = 1e-14,
                        max_m: int = 2000) -> complex:
    """Left-hand double sum of the Macdonald expansion (kind 1 or 2)."""
    if kind not in (1, 2):
        raise ValueError("kind must be 1 or 2")
    if not _lemma_region(args.x, args.y, args.z):
        raise OutOfRegion("(x, y, z) satisfies none of the convergence conditions")
    return _macdonald_sum(args.x, args.y, args.z, kind, tol, max_m)


def macdonald_lemma_rhs(args: MacdonaldSumArgs, kind: int) -> complex:
    """Closed combination of X and X' equal to :func:`macdonald_lemma_lhs`."""
    x, y, z = complex(args.x), complex(args.y), complex(args.z)
    v = TripleArg(x / (z * z), y * z / 2, -z * z / 4)
    u = TripleArg(x * z * z / 16, -x * y * z / 8, z * z / 4)
    c1, c2 = cmath.sqrt(math.pi / (2 * z)), cmath.sqrt(math.pi * z / 2)
    if kind == 1:
        return c1 * eval_x_prime(SeriesParams(0.5, 1.5), v).value - c2 * eval_x(SeriesParams(1.5, 1.5), u).value
    return c1 * eval_x(SeriesParams(0.5, 0.5), u).value - c2 * eval_x_prime(SeriesParams(-0.5, 0.5), v).value


def _physical_args(r: float, p: PhysicalParams) -> MacdonaldSumArgs:
    if not r > 0:
        raise OutOfRegion("the Macdonald sums need r > 0")
    if p.beta == 0:
        if p.alpha != 0:
            raise OutOfRegion("the Macdonald sums need beta > 0 when alpha > 0")
        return MacdonaldSumArgs(0j, 0j, r * p.sqrt_mz)
    return MacdonaldSumArgs.from_physical(r, p)


def macdonald_sum_g1(r: float, p: PhysicalParams, tol: float = 1e-14) -> complex:
    args = _physical_args(r, p)
    s = macdonald_lemma_lhs(args, 1, tol)
    return math.sqrt(r) / (4 * math.pi * math.sqrt(2 * math.pi) * cmath.sqrt(p.sqrt_mz)) * s


def macdonald_sum_g2(r: float, p: PhysicalParams, tol: float = 1e-14) -> complex:
    args = _physical_args(r, p)
    s = macdonald_lemma_lhs(args, 2, tol)
    return cmath.sqrt(p.sqrt_mz) / (2 * math.pi * math.sqrt(2 * math.pi * r)) * s


# ---------------------------------------------------------------------------
# brute force

def _log_rising(a: complex, lo: int, hi: int) -> np.ndarray:
    """``log (a)_k`` for k = lo..hi (lo <= 0 <= hi); -inf marks an exact zero."""
    out = np.zeros(hi - lo + 1, dtype=complex)
    with np.errstate(divide="ignore"):
        steps_up = np.log(a + np.arange(hi, dtype=complex))
        steps_down = -np.log(a - np.arange(1, -lo + 1, dtype=complex))
    out[-lo + 1:] = np.cumsum(steps_up)
    if lo < 0:
        out[:-lo] = np.cumsum(steps_down)[::-1]
    return out


def _log_powers(z: complex, cap: int, factorial: bool) -> np.ndarray:
    """``log(z^k / k!)`` (or ``log z^k``) for k = 0..cap; k = 0 gives 0 even at z = 0."""
    k = np.arange(cap + 1)
    with np.errstate(divide="ignore"):
        lz = np.log(complex(z))
    out = np.where(k == 0, 0, k * lz if z != 0 else -np.inf).astype(complex)
    if factorial:
        out = out - np.array([math.lgamma(j + 1) for j in k])
    return out


def _shell_total(terms: np.ndarray, shell: np.ndarray) -> complex:
    re = np.bincount(shell.ravel(), weights=terms.real.ravel())
    im = np.bincount(shell.ravel(), weights=terms.imag.ravel())
    total = 0j
    for s in range(re.size):
        total += complex(re[s], im[s])
    return total


def brute_force_x(p: SeriesParams, z: TripleArg, cap: int = 40) -> complex:
    """Truncated triple sum of X over 0 <= m, n, p <= cap.

    Each summand is formed as the exponential of a sum of logarithms, so
    large Pochhammer symbols never overflow.
    """
    if cap > 200:
        raise ValueError("cap must be at most 200")
    m, n, q = np.ogrid[: cap + 1, : cap + 1, : cap + 1]
    la = _log_rising(complex(p.a), 0, 4 * cap)
    lb = _log_rising(complex(p.b), 0, 2 * cap)
    logt = (_log_powers(z.z1, cap, True)[m] + _log_powers(z.z2, cap, False)[n]
            + _log_powers(z.z3, cap, True)[q] - la[2 * m + n + q] - lb[m + n])
    with np.errstate(all="ignore"):
        t = np.where(np.isneginf(logt.real), 0, np.exp(logt))
    return _shell_total(t, np.broadcast_to(m + n + q, t.shape))


def brute_force_x_prime(p: SeriesParams, z: TripleArg, cap: int = 60) -> complex:
    """Truncated triple sum of X' over 0 <= m, n, p <= cap; terms with n > m vanish."""
    if cap > 200:
        raise ValueError("cap must be at most 200")
    m, n, q = np.ogrid[: cap + 1, : cap + 1, : cap + 1]
    la = _log_rising(complex(p.a), -2 * cap, 2 * cap)
    lb = _log_rising(complex(p.b), 0, cap)
    # 1/(m-n)! is zero for n > m
    lfact = np.array([math.lgamma(k + 1) if k >= 0 else np.inf for k in range(-cap, cap + 1)])
    logt = (_log_powers(z.z1, cap, False)[m] + _log_powers(z.z2, cap, False)[n]
            + _log_powers(z.z3, cap, True)[q] + la[2 * m - n - q + 2 * cap]
            - lfact[m - n + cap] - lb[m])
    with np.errstate(all="ignore"):
        t = np.where(np.isneginf(logt.real) | (n > m), 0, np.exp(logt))
    return _shell_total(t, np.broadcast_to(m + n + q, t.shape))
