"""Self-contained invariant suite for a configured problem.

Five identities that the machinery must satisfy regardless of the
potential, each checked against an independent route (direct quadrature,
the adaptive ODE solver, or a second assembly path through the same
data).  The suite is what ``transmute validate`` runs; tests reuse it
with known-good and deliberately corrupted inputs.

A perturbation hook corrupts one fitted coefficient on request, which
must make the diagonal (Goursat) check fail -- that is the standard
smoke test that the suite actually measures what it claims to.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional

import numpy as np
from scipy.special import eval_jacobi, jv, roots_legendre

from .coeffs import BetaTable, compute_beta, unperturbed_term
from .errors import TransmuteError
from .kernel import apply_transmutation, kernel_K, make_kernel_series, goursat_series
from .oracle import ProblemSetup, regular_solution_ode
from .solution import integral_triangle

__all__ = ["CheckResult", "run_validation"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float        # measured figure of merit (a normalized error)
    tolerance: float
    detail: str

    def __post_init__(self):
        # numpy scalars sneak in from the comparisons; keep the record
        # plain so it serializes anywhere
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "tolerance", float(self.tolerance))


def _q_integral(setup: ProblemSetup, x: float) -> float:
    # Gauss-Legendre is plenty for the smooth potentials the suite
    # targets; 120 nodes keeps even table-interpolated q honest.
    z, w = roots_legendre(120)
    t = 0.5 * x * (z + 1.0)
    return float(0.5 * x * np.dot(w, np.asarray(setup.q(t), dtype=float)))


def _perturbed(beta: BetaTable, amount: float) -> BetaTable:
    vals = np.array(beta.beta, dtype=float)
    idx = min(int(round(beta.l)) + 2, beta.M)
    vals[idx] += amount * max(np.max(np.abs(vals)), 1.0)
    return replace(beta, beta=vals)


def _goursat_check(setup, beta, li) -> CheckResult:
    # Absolute tolerance floor so q = 0 (diagonal exactly zero) is judged
    # on the noise it produces, not on a 0/0 ratio.
    series = make_kernel_series(beta, mode="integer-l")
    got = goursat_series(series)
    want = 0.5 * _q_integral(setup, beta.x)
    err = abs(got - want)
    tol = max(1e-3 * abs(want), 1e-8)
    return CheckResult(
        "goursat-diagonal", err <= tol, err, tol,
        f"series diagonal {got:.6e} vs half potential integral {want:.6e} at x={beta.x:g}",
    )


def _sum_beta_check(beta) -> CheckResult:
    scale = float(np.max(np.abs(beta.beta)))
    total = abs(float(np.sum(beta.beta)))
    if scale <= 1e-10:
        return CheckResult(
            "coefficient-sum", True, total, 1e-10,
            f"coefficients at the noise floor (max|beta| = {scale:.3e}); "
            "cancellation identity vacuous",
        )
    # The identity sum_k beta_k = 0 holds for the full sequence; a table
    # truncated while |beta_k| is still decaying misses the tail, so
    # allow for it explicitly.  The tail follows the k^-(2l+3) decay law;
    # anchoring the estimate at k* = 0.6 M (trailing entries of a
    # truncated fit absorb the unmodeled tail and are biased low) and
    # adding a safety factor of 4 covers the residuals observed across M.
    # For integer l the decay is superexponential and the 1e-7 floor
    # governs instead.
    p = 2.0 * beta.l + 3.0
    k_star = max(1, int(0.6 * beta.M))
    tail_allowance = (
        4.0 * abs(float(beta.beta[k_star])) * k_star ** p * beta.M ** (1.0 - p) / (p - 1.0)
    )
    tol = max(1e-7 * scale, tail_allowance)
    return CheckResult(
        "coefficient-sum", total <= tol, total, tol,
        f"|sum beta| with max|beta| = {scale:.3e}, "
        f"truncation allowance {tail_allowance:.3e}",
    )


def _transmutation_check(setup, beta) -> CheckResult:
    # T applied to the unperturbed solution must give the regular
    # solution of the perturbed problem, for every omega at once.
    x = beta.x
    if abs(beta.l - round(beta.l)) <= 1e-9:
        series = make_kernel_series(beta, mode="integer-l")
        tol = 1e-6
    else:
        diag = 0.5 * _q_integral(setup, x)
        series = make_kernel_series(beta, goursat_diag=diag)
        tol = 1e-3
    worst = 0.0
    for omega in (1.0, 5.0, 10.0):
        y = lambda t, om=omega: unperturbed_term(setup.l, om, t)
        got = apply_transmutation(series, y, x, omega_hint=omega)
        sample = regular_solution_ode(setup, omega, [x])
        envelope = max(
            float(np.hypot(sample.u_values[0], sample.u_prime_values[0] / max(omega, 1.0))),
            1e-300,
        )
        worst = max(worst, abs(got - float(sample.u_values[0])) / envelope)
    return CheckResult(
        "transmutation-property", worst <= tol, worst, tol,
        f"max over omega in (1,5,10) of |T[y] - u_ode| / envelope at x={x:g}",
    )


def _recurrence_check(setup, li, rng) -> CheckResult:
    # The closed-form integral table versus direct quadrature built from
    # scipy primitives only (independent Bessel + Jacobi evaluations).
    worst = 0.0
    z24, w24 = roots_legendre(24)
    for _ in range(25):
        m_max = int(rng.integers(1, 11))
        x = float(rng.uniform(0.4, setup.b))
        omega = float(rng.uniform(1.0, 100.0)) / x
        tri = integral_triangle(li, m_max, omega, x)
        panels = max(4, 2 * int(np.ceil(omega * x / np.pi)))
        edges = np.linspace(0.0, x, panels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * np.diff(edges)
        t = (mid[:, None] + half[:, None] * z24[None, :]).ravel()
        w = (half[:, None] * w24[None, :]).ravel()
        zz = 1.0 - 2.0 * (t / x) ** 2
        ref = np.zeros_like(tri.values)
        for j in range(m_max + 1):
            k = li + j
            base = w * t ** (k + 1.5) * jv(k + 0.5, omega * t)
            for m in range(m_max - j + 1):
                ref[j, m] = np.dot(eval_jacobi(m, k + 0.5, k + 1.0, zz), base)
        scale = max(np.max(np.abs(ref)), 1e-300)
        worst = max(worst, np.max(np.abs(tri.values - ref)) / scale)
    tol = 1e-9
    return CheckResult(
        "recurrence-vs-quadrature", worst <= tol, worst, tol,
        "25 random (omega, x, m) draws, matrix-normalized",
    )


def _reduction_check(setup, beta1, rng) -> CheckResult:
    # Same coefficient table pushed through the two kernel assemblies;
    # at integer l they must agree wherever the general form is defined.
    int_series = make_kernel_series(beta1, mode="integer-l")
    real_series = make_kernel_series(beta1, mode="real-l", t_max_fraction=0.9)
    x = beta1.x
    diffs, mags = [], []
    for _ in range(50):
        t = float(rng.uniform(0.0, 0.9)) * x
        a = kernel_K(int_series, t)
        c = kernel_K(real_series, t)
        diffs.append(abs(a - c))
        mags.append(abs(a))
    worst = max(diffs) / max(max(mags), 1e-300)
    tol = 1e-8
    return CheckResult(
        "integer-reduction", worst <= tol, worst, tol,
        "two kernel assemblies from one coefficient table at l=1, 50 draws",
    )


def run_validation(
    setup: ProblemSetup,
    M: int = 22,
    seed: int = 0,
    beta_perturbation: float = 0.0,
    beta: Optional[BetaTable] = None,
) -> List[CheckResult]:
    """Run the five-check invariant suite; returns one result per check.

    Checks needing integer l (kernel diagonal, integral table) run at
    round(l) when l is integer, at l=1 otherwise; the reduction check
    always runs at l=1 because that is where the two kernel assemblies
    overlap.  ``beta_perturbation`` corrupts one coefficient by that
    fraction of max|beta| before the checks run (fault injection).
    """
    rng = np.random.default_rng(seed)
    li = int(round(setup.l)) if abs(setup.l - round(setup.l)) <= 1e-9 else 1
    li = max(li, 0)
    results: List[CheckResult] = []

    own = beta if beta is not None and abs(beta.l - setup.l) <= 1e-12 else compute_beta(
        setup, setup.b, M
    )
    if beta_perturbation:
        own = _perturbed(own, beta_perturbation)

    if abs(setup.l - li) <= 1e-9:
        beta_int = own
        setup_int = setup
    else:
        setup_int = ProblemSetup(l=float(li), b=setup.b, q=setup.q,
                                 smoothness_tag=setup.smoothness_tag)
        beta_int = compute_beta(setup_int, setup.b, M)
        if beta_perturbation:
            beta_int = _perturbed(beta_int, beta_perturbation)

    results.append(_goursat_check(setup_int, beta_int, li))
    results.append(_sum_beta_check(own))
    try:
        results.append(_transmutation_check(setup, own))
    except TransmuteError as exc:  # pragma: no cover - diagnostic path
        results.append(CheckResult("transmutation-property", False, np.inf, 1e-6, str(exc)))
    results.append(_recurrence_check(setup, li, rng))

    if li == 1:
        beta1, setup1 = beta_int, setup_int
    else:
        setup1 = ProblemSetup(l=1.0, b=setup.b, q=setup.q,
                              smoothness_tag=setup.smoothness_tag)
        beta1 = compute_beta(setup1, setup.b, M)
    results.append(_reduction_check(setup1, beta1, rng))
    return results
