"""Linear stability of the unbunched state.

Linearizing the mode hierarchy around (a, B_1) = (0, 0) gives a single
complex quadratic

    lambda^2 + (kappa + D) lambda + (kappa D - i) = 0,

equivalently (lambda + kappa)(lambda + D) = i. Its root with the larger real
part controls the exponential growth (gain) and oscillation frequency
(frequency shift) of the backscattered field. The growth rate crosses zero
exactly on the curve kappa*D*(D+kappa)^2 = 1, which separates the stable and
unstable regions of the (kappa, D) plane.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RegimeError
from .params import PhysicalParams, derive_scaled, rho_at_threshold

_CLOSED_FORM_TOL = 1e-10


@dataclass(frozen=True)
class DispersionResult:
    """Roots and observables of the linear dispersion relation at one (kappa, D)."""

    kappa: float
    D: float
    lambda_plus: complex     # root with the larger real part
    lambda_minus: complex
    gain_over_kc: float      # Re(lambda_plus) / kappa
    shift_over_kc: float     # Im(lambda_plus) / kappa
    margin: float            # kappa*D*(D+kappa)^2
    unstable: bool


def threshold_margin(kappa: float, D: float) -> float:
    """kappa*D*(D+kappa)^2; instability (nonnegative gain) iff the value is <= 1."""
    _check_domain(kappa, D)
    return kappa * D * (D + kappa) ** 2


def dispersion_roots(kappa: float, D: float) -> DispersionResult:
    """Solve (lambda + kappa)(lambda + D) = i and extract gain and shift.

    The root pair is computed from the quadratic and cross-checked against
    the closed-form gain/shift expressions in terms of C = (kappa - D)/2;
    a disagreement beyond 1e-10 indicates a numerical problem and raises.
    """
    _check_domain(kappa, D)
    # lambda = -(kappa+D)/2 +- sqrt(C^2 + i), C = (kappa - D)/2
    C = 0.5 * (kappa - D)
    s = cmath.sqrt(C * C + 1j)  # principal branch: Re(s) >= 0
    lam_p = -0.5 * (kappa + D) + s
    lam_m = -0.5 * (kappa + D) - s

    c4 = C ** 4
    gain_closed = math.sqrt(0.5 * (C * C + math.sqrt(1.0 + c4))) - 0.5 * (kappa + D)
    shift_closed = 1.0 / (math.sqrt(2.0) * math.sqrt(math.sqrt(1.0 + c4) + C * C))
    scale = max(1.0, abs(lam_p))
    if (abs(lam_p.real - gain_closed) > _CLOSED_FORM_TOL * scale
            or abs(lam_p.imag - shift_closed) > _CLOSED_FORM_TOL * scale):
        raise ArithmeticError(
            f"closed-form/root disagreement at kappa={kappa}, D={D}: "
            f"{lam_p} vs ({gain_closed}, {shift_closed})")

    margin = kappa * D * (D + kappa) ** 2
    return DispersionResult(
        kappa=kappa, D=D,
        lambda_plus=lam_p, lambda_minus=lam_m,
        gain_over_kc=lam_p.real / kappa,
        shift_over_kc=lam_p.imag / kappa,
        margin=margin,
        unstable=lam_p.real > 0.0,
    )


def threshold_D(kappa: float, abs_tol: float = 1e-12, max_iter: int = 200) -> float:
    """Unique D with kappa*D*(D+kappa)^2 = 1, by bisection.

    The margin is monotone increasing in D, zero at D = 0 and unbounded, so a
    bracket always exists. Asymptotically D_th -> kappa^(-1/3) for kappa << 1
    and D_th -> kappa^(-3) for kappa >> 1.
    """
    if not (kappa > 0 and math.isfinite(kappa)):
        raise DomainError(f"kappa must be finite and > 0, got {kappa!r}")
    lo = 0.0
    hi = max(kappa ** (-1.0 / 3.0), kappa ** -3.0)
    while threshold_margin(kappa, hi) < 1.0:
        hi *= 2.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if threshold_margin(kappa, mid) < 1.0:
            lo = mid
        else:
            hi = mid
        if abs(threshold_margin(kappa, 0.5 * (lo + hi)) - 1.0) < abs_tol:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class InstabilityMap:
    """Dispersion observables evaluated on a rectangular (kappa, D) grid.

    Arrays are indexed [i_kappa, i_D]; the instability boundary runs between
    cells whose margins straddle 1.
    """

    kappa: np.ndarray
    D: np.ndarray
    margin: np.ndarray
    re_lambda: np.ndarray
    im_lambda: np.ndarray
    unstable: np.ndarray

    def cell(self, i: int, j: int) -> DispersionResult:
        return dispersion_roots(float(self.kappa[i]), float(self.D[j]))


def instability_map(kappa_grid, D_grid) -> InstabilityMap:
    """Evaluate the dispersion relation on the outer product of the two grids."""
    kappa_grid = np.asarray(kappa_grid, dtype=float)
    D_grid = np.asarray(D_grid, dtype=float)
    if kappa_grid.size == 0 or D_grid.size == 0:
        raise DomainError("instability_map requires non-empty grids")
    if np.any(kappa_grid <= 0) or np.any(D_grid < 0):
        raise DomainError("instability_map requires kappa > 0 and D >= 0")

    nk, nd = kappa_grid.size, D_grid.size
    margin = np.empty((nk, nd))
    re_l = np.empty((nk, nd))
    im_l = np.empty((nk, nd))
    for i, k in enumerate(kappa_grid):
        for j, d in enumerate(D_grid):
            r = dispersion_roots(float(k), float(d))
            margin[i, j] = r.margin
            re_l[i, j] = r.lambda_plus.real
            im_l[i, j] = r.lambda_plus.imag
    return InstabilityMap(kappa=kappa_grid, D=D_grid, margin=margin,
                          re_lambda=re_l, im_lambda=im_l, unstable=re_l > 0)


_SWEEPABLE = ("temperature", "kappa_c", "gamma_f", "atom_count")
_GOOD_KAPPA_MAX = 0.15
_BAD_KAPPA_MIN = 5.0


def verify_scaling(phys_base: PhysicalParams, sweep: str, regime: str,
                   observable: str = "pump", n_points: int = 9,
                   decades: float = 1.0) -> float:
    """Fitted log-log exponent of a threshold observable along a parameter sweep.

    observable 'pump' uses rho_th^3 / N as the pump-power proxy (the coupling
    strength grows with the cube root of pump power times atom number;
    absolute prefactors are never meaningful here); 'shift' uses the threshold
    frequency shift Im(lambda_plus)/kappa evaluated at (kappa, D) on the
    threshold curve. The sweep multiplies one base parameter over the
    requested number of decades; every grid point must stay in the requested
    cavity regime or a RegimeError is raised.
    """
    if sweep not in _SWEEPABLE:
        raise DomainError(f"sweep must be one of {_SWEEPABLE}, got {sweep!r}")
    if regime not in ("good", "bad"):
        raise DomainError(f"regime must be 'good' or 'bad', got {regime!r}")
    if observable not in ("pump", "shift"):
        raise DomainError(f"observable must be 'pump' or 'shift', got {observable!r}")
    if n_points < 3 or decades < 1.0:
        raise DomainError("need n_points >= 3 spanning at least one decade")

    factors = np.geomspace(1.0, 10.0 ** decades, n_points)
    xs, ys = [], []
    for f in factors:
        fields = {name: getattr(phys_base, name)
                  for name in ("kappa_c", "gamma_f", "temperature", "atom_mass",
                               "wavenumber", "atom_count")}
        fields[sweep] = fields[sweep] * f
        phys = PhysicalParams(**fields, pump=phys_base.pump,
                              momentum_spread_prefactor=phys_base.momentum_spread_prefactor)
        rho_th = rho_at_threshold(phys)
        sp = derive_scaled(phys, rho_th)
        if regime == "good" and sp.kappa > _GOOD_KAPPA_MAX:
            raise RegimeError(f"kappa={sp.kappa:.3g} at threshold exceeds the "
                              f"good-cavity bound {_GOOD_KAPPA_MAX} (sweep factor {f:.3g})")
        if regime == "bad" and sp.kappa < _BAD_KAPPA_MIN:
            raise RegimeError(f"kappa={sp.kappa:.3g} at threshold is below the "
                              f"bad-cavity bound {_BAD_KAPPA_MIN} (sweep factor {f:.3g})")
        if observable == "pump":
            value = rho_th ** 3 / phys.atom_count
        else:
            value = dispersion_roots(sp.kappa, sp.D).shift_over_kc
        xs.append(math.log(getattr(phys, sweep)))
        ys.append(math.log(value))
    slope = np.polyfit(xs, ys, 1)[0]
    return float(slope)


def _check_domain(kappa: float, D: float) -> None:
    if not (isinstance(kappa, (int, float)) and math.isfinite(kappa) and kappa > 0):
        raise DomainError(f"kappa must be finite and > 0, got {kappa!r}")
    if not (isinstance(D, (int, float)) and math.isfinite(D) and D >= 0):
        raise DomainError(f"D must be finite and >= 0, got {D!r}")
