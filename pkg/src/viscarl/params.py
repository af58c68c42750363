"""Physical laboratory parameters and their reduction to the (kappa, D) plane.

Everything downstream works with two dimensionless numbers: the scaled cavity
loss kappa and the diffusion parameter D. This module builds them from
laboratory quantities (cavity linewidth, molasses friction, temperature,
atomic species) for a given collective coupling strength rho, and inverts the
instability-threshold relation kappa*D*(D+kappa)^2 = 1 to find the threshold
rho for a given apparatus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConvergenceError, DomainError

# CODATA: reduced Planck constant [J s] and Boltzmann constant [J/K]
HBAR = 1.054571817e-34
K_BOLTZMANN = 1.380649e-23


@dataclass(frozen=True)
class PumpParams:
    """Optional pump-field block; only enters through proportionality scalings.

    None of these appear in an implemented equation (converting rho to an
    absolute pump power would need all of them at once), but they are carried
    so run metadata can record the full experimental configuration.
    """

    detuning: Optional[float] = None        # rad/s
    rabi_frequency: Optional[float] = None  # rad/s
    dipole: Optional[float] = None          # C m
    mode_volume: Optional[float] = None     # m^3
    pump_power: Optional[float] = None      # W


@dataclass(frozen=True)
class PhysicalParams:
    """Laboratory parameters of a cold-atom ring-cavity setup with molasses.

    momentum_spread_prefactor fixes the convention sigma = prefactor * k * v_T
    / (omega_r * rho) with v_T = sqrt(k_B T / m) the 1D thermal rms velocity.
    The default 2.0 corresponds to measuring momentum in units of the
    two-photon recoil scale (p = 2 k v / (omega_r rho)).
    """

    kappa_c: float          # cavity field loss rate [rad/s]
    gamma_f: float          # molasses friction rate [rad/s]
    temperature: float      # [K]
    atom_mass: float        # [kg]
    wavenumber: float       # pump wavenumber k [1/m]
    atom_count: float       # N
    pump: Optional[PumpParams] = None
    momentum_spread_prefactor: float = 2.0

    def __post_init__(self):
        for name in ("kappa_c", "gamma_f", "temperature", "atom_mass",
                     "wavenumber", "atom_count", "momentum_spread_prefactor"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise DomainError(f"PhysicalParams.{name} must be finite and > 0, got {value!r}")

    @property
    def recoil_frequency(self) -> float:
        """omega_r = 2 hbar k^2 / m [rad/s], the two-photon recoil scale."""
        return 2.0 * HBAR * self.wavenumber**2 / self.atom_mass

    @property
    def thermal_velocity(self) -> float:
        """1D rms velocity sqrt(k_B T / m) [m/s]."""
        return math.sqrt(K_BOLTZMANN * self.temperature / self.atom_mass)


@dataclass(frozen=True)
class ScaledParams:
    """Dimensionless model parameters, all normalized to the collective
    bandwidth omega_r * rho.

    kappa = sqrt(gamma_bar) * K and D = sigma^2 / sqrt(gamma_bar) are the two
    numbers the rest of the toolkit consumes; the remaining fields record
    their provenance.
    """

    rho: float            # collective coupling strength
    omega_r_rho: float    # collective bandwidth [rad/s]
    K: float              # cavity loss / bandwidth
    gamma_bar: float      # friction / bandwidth
    sigma: float          # momentum spread / bandwidth
    kappa: float = field(init=False)
    D: float = field(init=False)

    def __post_init__(self):
        if not (self.rho > 0 and self.omega_r_rho > 0 and self.K > 0
                and self.gamma_bar > 0 and self.sigma >= 0):
            raise DomainError("ScaledParams requires rho, omega_r_rho, K, gamma_bar > 0 "
                              "and sigma >= 0")
        object.__setattr__(self, "kappa", math.sqrt(self.gamma_bar) * self.K)
        object.__setattr__(self, "D", self.sigma**2 / math.sqrt(self.gamma_bar))

    @property
    def momentum_diffusion(self) -> float:
        """D_p = gamma_bar * sigma^2, diffusion of the scaled momentum."""
        return self.gamma_bar * self.sigma**2

    @property
    def space_diffusion(self) -> float:
        """D_theta = sigma^2 / gamma_bar, phase diffusion in the overdamped limit."""
        return self.sigma**2 / self.gamma_bar

    @property
    def threshold_margin(self) -> float:
        """kappa*D*(D+kappa)^2; below 1 the unbunched state is unstable."""
        return self.kappa * self.D * (self.D + self.kappa) ** 2


def derive_scaled(phys: PhysicalParams, rho: float) -> ScaledParams:
    """Map laboratory parameters at coupling strength rho to (kappa, D)."""
    if not (isinstance(rho, (int, float)) and math.isfinite(rho) and rho > 0):
        raise DomainError(f"rho must be finite and > 0, got {rho!r}")
    bandwidth = phys.recoil_frequency * rho
    K = phys.kappa_c / bandwidth
    gamma_bar = phys.gamma_f / bandwidth
    sigma = (phys.momentum_spread_prefactor * phys.wavenumber
             * phys.thermal_velocity / bandwidth)
    return ScaledParams(rho=rho, omega_r_rho=bandwidth, K=K,
                        gamma_bar=gamma_bar, sigma=sigma)


def rho_at_threshold(phys: PhysicalParams,
                     bracket: tuple[float, float] = (1e-3, 1e6),
                     rel_tol: float = 1e-10) -> float:
    """Unique rho at which kappa*D*(D+kappa)^2 = 1.

    Both kappa and D scale as rho^(-3/2), so the margin is strictly monotone
    decreasing in rho and bisection on log(rho) converges unconditionally
    once the bracket straddles the root.
    """
    lo, hi = bracket

    def log_margin(rho):
        return math.log(derive_scaled(phys, rho).threshold_margin)

    f_lo, f_hi = log_margin(lo), log_margin(hi)
    if f_lo < 0 or f_hi > 0:
        raise ConvergenceError(
            f"threshold margin does not change sign on rho bracket {bracket}: "
            f"margin({lo})=e^{f_lo:.3g}, margin({hi})=e^{f_hi:.3g}")
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if log_margin(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel_tol * hi:
            break
    return math.sqrt(lo * hi)


def pump_ratio_to_params(phys: PhysicalParams, p_ratio: float) -> ScaledParams:
    """Scaled parameters at pump power P0 = p_ratio * P_threshold.

    rho grows with the cube root of pump power, so rho = rho_th * p_ratio^(1/3);
    kappa and D then both shrink as p_ratio^(-1/2).
    """
    if not (isinstance(p_ratio, (int, float)) and math.isfinite(p_ratio) and p_ratio > 0):
        raise DomainError(f"p_ratio must be finite and > 0, got {p_ratio!r}")
    rho_th = rho_at_threshold(phys)
    return derive_scaled(phys, rho_th * p_ratio ** (1.0 / 3.0))


def rb87_params(kappa_c: float = 2 * math.pi * 22e3,
                gamma_f_over_kappa_c: float = 9.0,
                temperature: float = 150e-6,
                atom_count: float = 1e6) -> PhysicalParams:
    """Rb-87 at 780 nm with the Tuebingen-style cavity numbers as defaults."""
    return PhysicalParams(
        kappa_c=kappa_c,
        gamma_f=gamma_f_over_kappa_c * kappa_c,
        temperature=temperature,
        atom_mass=1.44316060e-25,
        wavenumber=2 * math.pi / 780.241e-9,
        atom_count=atom_count,
    )
