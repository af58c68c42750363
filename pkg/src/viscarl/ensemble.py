"""Stochastic particle simulators: the independent oracle for the mode hierarchy.

Two levels of description are provided.

* The full inertial model in the "bar" scaling (time t_bar, field A): each
  particle carries a phase theta and a momentum p_bar subject to the optical
  dipole force, molasses friction -gamma_bar*p_bar and white momentum noise
  with diffusion gamma_bar*sigma^2; the field is driven by the bunching
  <e^{-i theta}> and decays at rate K.

* The overdamped model in the (tau, a) scaling: momentum is eliminated and
  each phase performs driven Brownian motion with diffusion D, which is the
  Langevin counterpart of the Fokker-Planck hierarchy in fpmodes. The two
  scalings are related by a = A/sqrt(gamma_bar), tau = t_bar/sqrt(gamma_bar).

Both use Euler-Maruyama steps; acceptance is on distribution-level
observables, for which strong order 1/2 is sufficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, IntegrationError


@dataclass
class ParticleEnsemble:
    """Phases, momenta and RNG state for one stochastic run.

    theta is kept unwrapped so Var(theta) diagnostics make sense; it is
    reduced mod 2pi only inside bunching and histogram computations.
    p_bar is None in overdamped mode.
    """

    theta: np.ndarray
    p_bar: Optional[np.ndarray]
    rng: np.random.Generator
    seed: int

    @property
    def n_sim(self) -> int:
        return len(self.theta)


def init_ensemble(n_sim: int, sigma: float, seed: int,
                  overdamped: bool = False,
                  stratified_phases: bool = False) -> ParticleEnsemble:
    """Thermal initial condition: phases uniform on [0, 2pi), momenta N(0, sigma^2).

    stratified_phases places the phases on an even grid instead of sampling
    them, which zeroes the initial shot noise of the bunching; useful when
    comparing against the deterministic hierarchy.
    """
    if n_sim < 1:
        raise DomainError(f"n_sim must be >= 1, got {n_sim}")
    if sigma < 0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    rng = np.random.default_rng(seed)
    if stratified_phases:
        theta = 2.0 * math.pi * (np.arange(n_sim) + 0.5) / n_sim
    else:
        theta = rng.uniform(0.0, 2.0 * math.pi, n_sim)
    p_bar = None if overdamped else sigma * rng.standard_normal(n_sim)
    return ParticleEnsemble(theta=theta, p_bar=p_bar, rng=rng, seed=seed)


def ensemble_bunching(ens: ParticleEnsemble) -> complex:
    """<e^{-i theta}> over the ensemble."""
    return complex(np.exp(-1j * ens.theta).mean())


def step_full(ens: ParticleEnsemble, a_field: complex, gamma_bar: float,
              sigma: float, K_loss: float, dt_bar: float) -> complex:
    """One Euler-Maruyama step of the inertial model in (t_bar, A) variables.

    Mutates the ensemble arrays in place and returns the updated field. The
    field update uses the pre-step bunching, matching the explicit scheme.
    """
    if dt_bar <= 0:
        raise DomainError(f"dt_bar must be > 0, got {dt_bar}")
    if ens.p_bar is None:
        raise DomainError("step_full requires an inertial ensemble (p_bar present)")
    e = np.exp(-1j * ens.theta)
    b = e.mean()
    drift = -2.0 * (a_field * np.conj(e)).real - gamma_bar * ens.p_bar
    noise = math.sqrt(2.0 * gamma_bar * sigma * sigma * dt_bar)
    ens.p_bar += drift * dt_bar
    if noise > 0.0:
        ens.p_bar += noise * ens.rng.standard_normal(ens.n_sim)
    ens.theta += ens.p_bar * dt_bar
    a_new = a_field + (b - K_loss * a_field) * dt_bar
    _nan_guard(ens, a_new)
    return a_new


def step_overdamped(ens: ParticleEnsemble, a_field: complex, D: float,
                    kappa: float, dtau: float) -> complex:
    """One Euler-Maruyama step of the overdamped model in (tau, a) variables."""
    if dtau <= 0:
        raise DomainError(f"dtau must be > 0, got {dtau}")
    e = np.exp(-1j * ens.theta)
    b = e.mean()
    drift = -2.0 * (a_field * np.conj(e)).real
    ens.theta += drift * dtau
    if D > 0.0:
        ens.theta += math.sqrt(2.0 * D * dtau) * ens.rng.standard_normal(ens.n_sim)
    a_new = a_field + (b - kappa * a_field) * dtau
    _nan_guard(ens, a_new)
    return a_new


@dataclass
class EnsembleTrajectory:
    """Sampled observables of one stochastic run, in (tau, a) variables."""

    tau: np.ndarray
    a: np.ndarray
    bunching: np.ndarray       # |<e^{-i theta}>|
    mean_p: np.ndarray         # <p> in the overdamped scaling (NaN if unavailable)
    var_p: np.ndarray
    var_theta: np.ndarray
    n_particles: int
    seed: int

    @property
    def abs_a_sq(self) -> np.ndarray:
        return np.abs(self.a) ** 2


def run_overdamped(kappa: float, D: float, n_sim: int, seed: int,
                   a0: complex = 1e-5, dtau: float = 0.0025,
                   t_end: float = 100.0, sample_dtau: float = 0.25,
                   stratified_phases: bool = False) -> EnsembleTrajectory:
    """Integrate the overdamped Langevin model and sample observables."""
    ens = init_ensemble(n_sim, 0.0, seed, overdamped=True,
                        stratified_phases=stratified_phases)
    a = complex(a0)
    n_steps = int(math.ceil(t_end / dtau - 1e-12))
    every = max(1, int(round(sample_dtau / dtau)))
    taus, fields, bs, vth = [], [], [], []
    for i in range(n_steps + 1):
        if i % every == 0 or i == n_steps:
            taus.append(i * dtau)
            fields.append(a)
            bs.append(abs(np.exp(-1j * ens.theta).mean()))
            vth.append(float(np.var(ens.theta)))
        if i == n_steps:
            break
        a = step_overdamped(ens, a, D, kappa, dtau)
    nanarr = np.full(len(taus), np.nan)
    return EnsembleTrajectory(tau=np.array(taus), a=np.array(fields),
                              bunching=np.array(bs), mean_p=nanarr,
                              var_p=nanarr.copy(), var_theta=np.array(vth),
                              n_particles=n_sim, seed=seed)


def run_full(kappa: float, D: float, gamma_bar: float, n_sim: int, seed: int,
             a0: complex = 1e-5, t_end: float = 100.0,
             sample_dtau: float = 0.25, dt_bar: float | None = None,
             stratified_phases: bool = False) -> EnsembleTrajectory:
    """Integrate the inertial model mapped to a target (kappa, D).

    The run is performed in (t_bar, A) variables with K = kappa/sqrt(gamma_bar)
    and sigma = sqrt(D*sqrt(gamma_bar)); observables are reported back in the
    overdamped (tau, a) scaling so trajectories at different gamma_bar are
    directly comparable. t_end and sample_dtau are in tau units.
    """
    if gamma_bar <= 0:
        raise DomainError(f"gamma_bar must be > 0, got {gamma_bar}")
    sqg = math.sqrt(gamma_bar)
    K = kappa / sqg
    sigma = math.sqrt(D * sqg)
    if dt_bar is None:
        dt_bar = 0.05 / gamma_bar   # resolve the friction timescale
    ens = init_ensemble(n_sim, sigma, seed, stratified_phases=stratified_phases)
    A = complex(a0) * sqg
    tb_end = t_end * sqg
    n_steps = int(math.ceil(tb_end / dt_bar - 1e-12))
    every = max(1, int(round(sample_dtau * sqg / dt_bar)))
    taus, fields, bs, mps, vps, vth = [], [], [], [], [], []
    for i in range(n_steps + 1):
        if i % every == 0 or i == n_steps:
            taus.append(i * dt_bar / sqg)
            fields.append(A / sqg)
            bs.append(abs(np.exp(-1j * ens.theta).mean()))
            mps.append(sqg * float(np.mean(ens.p_bar)))   # p = sqrt(gamma_bar) p_bar
            vps.append(float(np.var(ens.p_bar)))
            vth.append(float(np.var(ens.theta)))
        if i == n_steps:
            break
        A = step_full(ens, A, gamma_bar, sigma, K, dt_bar)
    return EnsembleTrajectory(tau=np.array(taus), a=np.array(fields),
                              bunching=np.array(bs), mean_p=np.array(mps),
                              var_p=np.array(vps), var_theta=np.array(vth),
                              n_particles=n_sim, seed=seed)


def _nan_guard(ens: ParticleEnsemble, a_field: complex) -> None:
    if not math.isfinite(abs(a_field)):
        raise IntegrationError("field became non-finite during SDE integration")
    if not np.all(np.isfinite(ens.theta)):
        raise IntegrationError("particle phases became non-finite during SDE integration")
