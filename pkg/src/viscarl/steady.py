"""Nonlinear steady states of the field-density system.

Above threshold the system settles onto a rotating state: the field phase
advances at a constant rate omega while the density grating translates
rigidly, a = alpha e^{i omega tau}, B_n = beta_n e^{i n omega tau}. The
harmonic amplitudes obey the three-term recurrence

    (omega - i n D) beta_n = alpha beta_{n-1} + alpha* beta_{n+1},

with beta_0 = 1 and alpha = beta_1/(kappa + i omega). Evaluating
beta_1/beta_0 as a continued fraction reduces the problem to two real
unknowns (b, omega), solved here by damped Newton iteration. Closed-form
limits (perfect bunching at D = 0) and a Gaussian-density approximation are
provided as cross-checks, along with D-sweeps and pump-ramp scans.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConvergenceError, DomainError, NumericalSingularityError
from .params import PhysicalParams, pump_ratio_to_params, rho_at_threshold
from .stability import dispersion_roots, threshold_margin

NEWTON_TOL = 1e-12
RESIDUAL_BOUND = 1e-9
CF_START_DEPTH = 64
CF_MAX_DEPTH = 4096
CF_TOL = 1e-12
TRIVIAL_B = 1e-10


@dataclass(frozen=True)
class SteadyStateSolution:
    """Rotating steady state at one (kappa, D)."""

    kappa: float
    D: float
    b: float                   # bunching |beta_1|, gauge-fixed real >= 0
    omega: float               # rotation frequency of the field phase
    alpha: complex             # field amplitude, alpha = beta_1/(kappa + i omega)
    beta: np.ndarray           # harmonic amplitudes beta_0..beta_depth
    mean_p: float              # -2 kappa b^2/(kappa^2 + omega^2)
    converged: bool
    below_threshold: bool
    residual: float

    @property
    def abs_a_sq(self) -> float:
        return abs(self.alpha) ** 2


def perfect_bunching(kappa: float) -> tuple[float, float, float]:
    """Zero-diffusion, b = 1 closed form: returns (mean_p, abs_a_sq, omega).

    mean_p is the unique real root of p (kappa^2 + p^2) = -2 kappa; the grating
    then rotates at omega = -mean_p and |a|^2 = 1/(kappa^2 + mean_p^2).
    """
    if kappa <= 0:
        raise DomainError(f"kappa must be > 0, got {kappa}")
    # p^3 + kappa^2 p + 2 kappa = 0 is monotone increasing in p, so it has
    # exactly one real (negative) root; bisect between 0 and the asymptotes.
    def f(p):
        return p * (kappa * kappa + p * p) + 2.0 * kappa

    lo = -2.0 * max((2.0 * kappa) ** (1.0 / 3.0), 2.0 / kappa)
    hi = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16 * max(1.0, abs(lo)):
            break
    p = 0.5 * (lo + hi)
    a_sq = 1.0 / (kappa * kappa + p * p)
    return p, a_sq, -p


def continued_fraction_ratio(alpha: complex, omega: float, D: float,
                             depth: int) -> complex:
    """beta_1/beta_0 by downward recursion of r_n = beta_n/beta_{n-1}.

    r_n = alpha / [(omega - i n D) - alpha* r_{n+1}], started from
    r_{depth+1} = 0. Diffusion guarantees the downward direction is the
    minimal (stable) solution of the recurrence.
    """
    if depth < 2:
        raise DomainError(f"depth must be >= 2, got {depth}")
    if D <= 0:
        raise DomainError(f"D must be > 0, got {D}")
    r = 0.0 + 0.0j
    ac = alpha.conjugate()
    for n in range(depth, 0, -1):
        den = complex(omega, -n * D) - ac * r
        if abs(den) < 1e-300:
            raise NumericalSingularityError(
                f"vanishing denominator at level n={n} of the continued fraction")
        r = alpha / den
    return r


def _converged_ratio(alpha: complex, omega: float, D: float) -> tuple[complex, int]:
    depth = CF_START_DEPTH
    prev = continued_fraction_ratio(alpha, omega, D, depth)
    while depth < CF_MAX_DEPTH:
        depth *= 2
        cur = continued_fraction_ratio(alpha, omega, D, depth)
        if abs(cur - prev) < CF_TOL:
            return cur, depth
        prev = cur
    return prev, depth


def _harmonics(alpha: complex, omega: float, D: float, depth: int) -> np.ndarray:
    """beta_0..beta_depth from the downward ratios, with beta_0 = 1."""
    ratios = np.empty(depth + 1, dtype=complex)   # ratios[n] = beta_n/beta_{n-1}
    r = 0.0 + 0.0j
    ac = alpha.conjugate()
    for n in range(depth, 0, -1):
        r = alpha / (complex(omega, -n * D) - ac * r)
        ratios[n] = r
    beta = np.empty(depth + 1, dtype=complex)
    beta[0] = 1.0
    for n in range(1, depth + 1):
        beta[n] = beta[n - 1] * ratios[n]
    return beta


def solve_steady(kappa: float, D: float,
                 initial_guess: Optional[tuple[float, float]] = None,
                 max_iter: int = 200, harmonics: int = 64) -> SteadyStateSolution:
    """Exact rotating steady state by damped Newton on (b, omega).

    The gauge freedom (global phase translation) is fixed by taking beta_1 = b
    real and nonnegative; the complex self-consistency condition
    r_1(alpha(b, omega), omega, D) = b then supplies two real equations for
    the two unknowns. Below threshold the trivial branch b = 0 is reported
    with omega set to the linear oscillation frequency.
    """
    if kappa <= 0 or D <= 0:
        raise DomainError(f"solve_steady requires kappa > 0 and D > 0, "
                          f"got kappa={kappa}, D={D}")

    lin = dispersion_roots(kappa, D)
    if lin.margin > 1.0 and initial_guess is None:
        return _trivial_branch(kappa, D, lin.lambda_plus.imag, harmonics)

    if initial_guess is None:
        p0, _, w0 = perfect_bunching(kappa)
        x = np.array([0.999, w0])
    else:
        x = np.array(initial_guess, dtype=float)

    def residual_vec(x):
        b, omega = x
        alpha = b / complex(kappa, omega)
        r1, _ = _converged_ratio(alpha, omega, D)
        return np.array([r1.real - b, r1.imag])

    f = residual_vec(x)
    res = float(np.hypot(*f))
    for _ in range(max_iter):
        if res < NEWTON_TOL:
            break
        J = np.empty((2, 2))
        for j in range(2):
            h = 1e-6 * max(abs(x[j]), 1e-3)
            xp = x.copy(); xp[j] += h
            xm = x.copy(); xm[j] -= h
            J[:, j] = (residual_vec(xp) - residual_vec(xm)) / (2.0 * h)
        try:
            dx = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular Jacobian at x={x}", residual=res) from exc
        t = 1.0
        while t > 1e-6:
            xn = x + t * dx
            fn = residual_vec(xn)
            rn = float(np.hypot(*fn))
            if rn < res:
                x, f, res = xn, fn, rn
                break
            t *= 0.5
        else:
            break  # damping exhausted; report whatever we reached
    else:
        if res >= NEWTON_TOL:
            raise ConvergenceError(
                f"steady-state Newton did not converge at kappa={kappa}, D={D}",
                residual=res)

    b, omega = float(x[0]), float(x[1])
    if b < TRIVIAL_B or lin.margin > 1.0:
        return _trivial_branch(kappa, D, lin.lambda_plus.imag, harmonics)
    if res >= RESIDUAL_BOUND:
        raise ConvergenceError(
            f"steady-state residual {res:.3g} exceeds bound at kappa={kappa}, D={D}",
            residual=res)

    alpha = b / complex(kappa, omega)
    beta = _harmonics(alpha, omega, D, harmonics)
    mean_p = -2.0 * kappa * b * b / (kappa * kappa + omega * omega)
    return SteadyStateSolution(kappa=kappa, D=D, b=b, omega=omega, alpha=alpha,
                               beta=beta, mean_p=mean_p, converged=True,
                               below_threshold=False, residual=res)


def _trivial_branch(kappa, D, omega_lin, harmonics) -> SteadyStateSolution:
    beta = np.zeros(harmonics + 1, dtype=complex)
    beta[0] = 1.0
    return SteadyStateSolution(kappa=kappa, D=D, b=0.0, omega=float(omega_lin),
                               alpha=0.0 + 0.0j, beta=beta, mean_p=0.0,
                               converged=True, below_threshold=True, residual=0.0)


def recurrence_residual(sol: SteadyStateSolution) -> float:
    """Max residual of (omega - i n D) beta_n = alpha beta_{n-1} + alpha* beta_{n+1}
    over the solved interior harmonics."""
    beta = sol.beta
    worst = 0.0
    for n in range(1, len(beta) - 1):
        lhs = complex(sol.omega, -n * sol.D) * beta[n]
        rhs = sol.alpha * beta[n - 1] + sol.alpha.conjugate() * beta[n + 1]
        worst = max(worst, abs(lhs - rhs))
    return worst


def gaussian_approx(kappa: float, D: float, tol: float = 1e-10,
                    max_iter: int = 10000) -> tuple[float, float]:
    """Approximate (b, omega) assuming a Gaussian density profile.

    Alternates b = exp(-D sqrt(kappa) / (2 sqrt(2 omega - kappa omega^2)))
    with the frequency balance omega (kappa^2 + omega^2) = 2 kappa b^2. The
    balance is solved exactly for omega at each pass (the naive update map
    has slope < -1 near the solution and would oscillate). Valid only while
    0 < omega < 2/kappa; leaving that domain raises, which is the expected
    behaviour near and below threshold.
    """
    if kappa <= 0 or D < 0:
        raise DomainError(f"gaussian_approx requires kappa > 0 and D >= 0")
    _, _, omega = perfect_bunching(kappa)
    b = 1.0
    for _ in range(max_iter):
        g = 2.0 * omega - kappa * omega * omega
        if g <= 0.0:
            raise DomainError(
                f"Gaussian ansatz left its domain (2*omega - kappa*omega^2 <= 0) "
                f"at kappa={kappa}, D={D}; the ansatz is invalid this close to threshold")
        b_new = math.exp(-D * math.sqrt(kappa) / (2.0 * math.sqrt(g)))
        omega_new = _frequency_balance(kappa, b_new)
        if abs(b_new - b) + abs(omega_new - omega) < tol:
            return b_new, omega_new
        b, omega = b_new, omega_new
    raise ConvergenceError(
        f"Gaussian fixed point did not converge at kappa={kappa}, D={D}",
        residual=abs(b_new - b))


def _frequency_balance(kappa: float, b: float) -> float:
    """Positive real root of omega^3 + kappa^2 omega - 2 kappa b^2 = 0."""
    omega = max(b * math.sqrt(2.0 * kappa), kappa)  # positive starting point
    for _ in range(100):
        f = omega * (kappa * kappa + omega * omega) - 2.0 * kappa * b * b
        df = kappa * kappa + 3.0 * omega * omega
        step = f / df
        omega -= step
        if abs(step) < 1e-15 * max(1.0, omega):
            break
    return omega


@dataclass(frozen=True)
class SweepPoint:
    D: float
    exact: SteadyStateSolution
    gaussian_b: Optional[float]      # None where the ansatz left its domain
    gaussian_omega: Optional[float]
    error: Optional[str] = None


def sweep_D(kappa: float, D_grid) -> list[SweepPoint]:
    """Exact and Gaussian steady states along an ascending D grid.

    The exact solver is continued from the previous grid point; per-point
    failures are recorded in the row instead of aborting the sweep.
    """
    D_grid = np.asarray(D_grid, dtype=float)
    if D_grid.size == 0 or np.any(D_grid <= 0) or np.any(np.diff(D_grid) <= 0):
        raise DomainError("sweep_D requires a strictly ascending positive grid")
    points: list[SweepPoint] = []
    guess = None
    for Dv in D_grid:
        err = None
        try:
            sol = solve_steady(kappa, float(Dv), initial_guess=guess)
            if not sol.below_threshold and sol.b > TRIVIAL_B:
                guess = (sol.b, sol.omega)
        except (ConvergenceError, NumericalSingularityError) as exc:
            sol = _trivial_branch(kappa, float(Dv),
                                  dispersion_roots(kappa, float(Dv)).lambda_plus.imag, 64)
            err = str(exc)
        try:
            gb, gw = gaussian_approx(kappa, float(Dv))
        except (DomainError, ConvergenceError):
            gb, gw = None, None
        points.append(SweepPoint(D=float(Dv), exact=sol,
                                 gaussian_b=gb, gaussian_omega=gw, error=err))
    return points


@dataclass(frozen=True)
class RampPoint:
    p_ratio: float
    rho: float
    kappa: float
    D: float
    b: float
    omega_over_kappa: float
    a_sq: float


def ramp_scan(phys: PhysicalParams, ratio_grid) -> list[RampPoint]:
    """Steady-state observables versus pump power in units of the threshold power.

    Below ratio = 1 the system sits on the trivial branch: b and |a|^2 are
    zero and omega/kappa is the linear oscillation frequency, which at
    ratio = 1 equals the threshold frequency shift.
    """
    ratio_grid = np.asarray(ratio_grid, dtype=float)
    if ratio_grid.size == 0 or np.any(ratio_grid <= 0):
        raise DomainError("ramp_scan requires positive pump ratios")
    rows = []
    for ratio in ratio_grid:
        sp = pump_ratio_to_params(phys, float(ratio))
        sol = solve_steady(sp.kappa, sp.D)
        rows.append(RampPoint(p_ratio=float(ratio), rho=sp.rho,
                              kappa=sp.kappa, D=sp.D, b=sol.b,
                              omega_over_kappa=sol.omega / sp.kappa,
                              a_sq=sol.abs_a_sq))
    return rows
