"""Regular-solution evaluation with uniform-in-frequency error control.

The normalized regular solution (behaving like
(omega x)^(l+1)/(2^(l+1/2) Gamma(l+3/2)) at the origin) is

    u(omega, x) = sqrt(omega x) J_{l+1/2}(omega x)
                  + sqrt(pi omega)/(x^(2l+3) Gamma(l+3/2))
                    * sum_m (-1)^(m+l+1) (Gamma(m+2l+5/2)/Gamma(m+l+3/2))
                      beta_{m+l+1}(x) I_{l,m}(omega, x),

where I_{k,m} = int_0^x t^(k+3/2) J_{k+1/2}(omega t)
P_m^(k+1/2, k+1)(1-2t^2/x^2) dt.  The I-table satisfies a two-term
recurrence anchored at the closed form I_{k,0} = x^(k+3/2)
J_{k+3/2}(omega x)/omega, so evaluating the truncated sum u_N costs one
spherical-Bessel pass plus O(N^2) arithmetic — for any omega.  The payoff
is the uniform bound |u - u_N| <= c_l * eps_N(x) with c_l =
sup_z |sqrt(z) J_{l+1/2}(z)| and eps_N the L1 kernel truncation error:
the accuracy does not degrade as omega grows, which is what makes
large-index eigenvalue computation behave.

Integer l only: the recurrence rests on integer-order Jacobi derivative
identities.  Non-integer l goes through kernel.apply_transmutation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import roots_legendre

from . import specialfn
from .coeffs import BetaTable
from .errors import DomainError

__all__ = [
    "IntegralTriangle",
    "SolutionEvaluator",
    "integral_triangle",
    "solution_evaluator",
    "u_N",
    "uniform_error_bound",
    "sup_sqrt_bessel",
]

SMALL_PHASE = 0.1   # below omega*x = 0.1 the recurrence divides tiny by tiny;
                    # direct quadrature of the defining integral is used instead


@dataclass(frozen=True)
class IntegralTriangle:
    """Values I_{k,m}(omega, x) for k = l..l+m_max, m = 0..m_max-(k-l).

    values[j, m] holds I_{l+j, m}; entries outside the triangle are zero.
    """

    l: int
    m_max: int
    omega: float
    x: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.m_max + 1, self.m_max + 1):
            raise DomainError(
                f"values must be ({self.m_max + 1}, {self.m_max + 1}), got {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise DomainError("triangle entries must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def value(self, k: int, m: int) -> float:
        j = k - self.l
        if not (0 <= j <= self.m_max and 0 <= m <= self.m_max - j):
            raise DomainError(f"(k={k}, m={m}) outside the triangle")
        return float(self.values[j, m])


def _triangle_quadrature(l, m_max, omega, x):
    """Direct Gauss-Legendre evaluation of every I_{k,m}; the slow exact
    route, used when omega*x is too small for the recurrence."""
    z60, w60 = roots_legendre(60)
    t = 0.5 * x * (z60 + 1.0)
    w = 0.5 * x * w60
    zz = 1.0 - 2.0 * (t / x) ** 2
    out = np.zeros((m_max + 1, m_max + 1))
    for j in range(m_max + 1):
        k = l + j
        bess = specialfn.bessel_j_half(float(k), omega * t)
        base = w * t ** (k + 1.5) * bess
        rows = specialfn.jacobi_all(m_max - j, k + 0.5, k + 1.0, zz)
        out[j, : m_max - j + 1] = rows @ base
    return out


def integral_triangle(l: int, m_max: int, omega: float, x: float) -> IntegralTriangle:
    """Build the I_{k,m} table at one (omega, x).

    Anchored at I_{k,0} = x^(k+3/2) J_{k+3/2}(omega x)/omega (one spherical
    Bessel pass covers every k), then filled by

        I_{k,m} = (-1)^m C(k+m+1, m) I_{k,0}
                  + ((2m+4k+5)/(omega x^2)) I_{k+1,m-1}.

    For omega*x < 0.1 every entry is computed by direct quadrature of the
    defining integral instead.
    """
    if l < 0 or m_max < 0:
        raise DomainError("need l >= 0 and m_max >= 0")
    if omega <= 0.0 or x <= 0.0:
        raise DomainError("need omega > 0 and x > 0")
    if omega * x < SMALL_PHASE:
        vals = _triangle_quadrature(l, m_max, omega, x)
        return IntegralTriangle(l=l, m_max=m_max, omega=omega, x=x, values=vals)

    z = omega * x
    jt = specialfn.spherical_j_table(l + m_max + 1, z)[:, 0]
    amp = math.sqrt(2.0 * z / math.pi)
    out = np.zeros((m_max + 1, m_max + 1))
    ks = np.arange(l, l + m_max + 1)
    out[:, 0] = x ** (ks + 1.5) * amp * jt[ks + 1] / omega

    wx2 = omega * x * x
    for m in range(1, m_max + 1):
        j = np.arange(0, m_max - m + 1)
        k = l + j
        # C(k+m+1, m) stays modest for the truncations in play (< 1e15 at
        # k+m ~ 50), so plain floats are fine
        binom = np.exp(
            _lgamma_arr(k + m + 2.0) - _lgamma_arr(m + 1.0) - _lgamma_arr(k + 2.0)
        )
        out[j, m] = (-1.0) ** m * binom * out[j, 0] \
            + (2.0 * m + 4.0 * k + 5.0) / wx2 * out[j + 1, m - 1]
    return IntegralTriangle(l=l, m_max=m_max, omega=omega, x=x, values=out)


def _lgamma_arr(v):
    from scipy.special import gammaln

    return gammaln(np.asarray(v, dtype=float))


@lru_cache(maxsize=32)
def sup_sqrt_bessel(l: float) -> float:
    """Empirical sup over z > 0 of |sqrt(z) J_{l+1/2}(z)|.

    The function tends to sqrt(2/pi) from its oscillating envelope as
    z grows; the global maximum sits near the turning point z ~ l, so a
    dense scan over (0, 4l+60] with a fine pass around the argmax settles
    it to ~1e-8, plenty for an error *budget* constant.
    """
    hi = 4.0 * max(l, 0.0) + 60.0
    z = np.linspace(1e-4, hi, 60001)
    vals = np.abs(np.sqrt(z) * specialfn.bessel_j_half(l, z))
    i = int(np.argmax(vals))
    lo2, hi2 = max(z[i] - 0.01, 1e-6), z[i] + 0.01
    z2 = np.linspace(lo2, hi2, 20001)
    refined = float(np.max(np.abs(np.sqrt(z2) * specialfn.bessel_j_half(l, z2))))
    return max(refined, math.sqrt(2.0 / math.pi))


@dataclass(frozen=True)
class SolutionEvaluator:
    """Precombined state for u_N at one x: the BetaTable, the truncation,
    and the uniform-bound constant c_l."""

    beta: BetaTable
    N: int
    l: int
    c_l_estimate: float

    def __post_init__(self):
        if self.N + self.l + 1 > self.beta.M:
            raise DomainError(
                f"N={self.N} needs beta indices up to {self.N + self.l + 1}, "
                f"table has M={self.beta.M}"
            )


def solution_evaluator(beta: BetaTable, N: int | None = None) -> SolutionEvaluator:
    """Bundle a BetaTable into a SolutionEvaluator (integer l only).

    N defaults to the largest the table supports, M - l - 1.
    """
    l = beta.l
    if abs(l - round(l)) > 1e-9 or l < 0:
        raise DomainError(
            f"the recurrent representation needs integer l >= 0, got {l}"
        )
    li = int(round(l))
    if N is None:
        N = beta.M - li - 1
    if N < 0:
        raise DomainError(f"table with M={beta.M} too short at l={li}")
    return SolutionEvaluator(
        beta=beta, N=N, l=li, c_l_estimate=sup_sqrt_bessel(float(li))
    )


def _series_coefficients(ev: SolutionEvaluator) -> np.ndarray:
    """(-1)^(m+l+1) Gamma-ratio beta_{m+l+1} sqrt(pi)/(x^(2l+3) Gamma(l+3/2)),
    i.e. the kernel-series weights; multiplied by sqrt(omega) I_{l,m} they
    are the u_N correction terms."""
    l, x = ev.l, ev.beta.x
    m = np.arange(ev.N + 1)
    lpref = 0.5 * math.log(math.pi) - (2 * l + 3) * math.log(x) \
        - math.lgamma(l + 1.5)
    sign = (-1.0) ** (m + l + 1)
    return sign * np.exp(lpref + specialfn.gamma_ratio_log(m, float(l))) \
        * ev.beta.beta[m + l + 1]


def u_N(ev: SolutionEvaluator, omega: float, x: float) -> float:
    """Truncated representation of the normalized regular solution.

    The approximation error is bounded by c_l * eps_N(x) independently of
    omega — see uniform_error_bound.
    """
    if omega <= 0.0:
        raise DomainError(f"omega must be > 0, got {omega}")
    if abs(x - ev.beta.x) > 1e-9 * max(1.0, ev.beta.x):
        raise DomainError(
            f"evaluator holds coefficients at x={ev.beta.x}, got x={x}"
        )
    tri = integral_triangle(ev.l, ev.N, omega, x)
    coefs = _series_coefficients(ev) * math.sqrt(omega) * tri.values[0]
    total = 0.0
    comp = 0.0
    for val in coefs[::-1]:
        t = total + val
        if abs(total) >= abs(val):
            comp += (total - t) + val
        else:
            comp += (val - t) + total
        total = t
    z = omega * x
    main = z * math.sqrt(2.0 / math.pi) * specialfn.spherical_j(ev.l, z)
    return main + total + comp


def uniform_error_bound(ev: SolutionEvaluator, x: float, eps_N: float) -> float:
    """omega-independent error budget c_l * eps_N for |u - u_N| on (0, x]."""
    if eps_N < 0.0:
        raise DomainError("eps_N must be >= 0")
    return ev.c_l_estimate * float(eps_N)
