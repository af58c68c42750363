"""Spectral integrator for the overdamped phase-space density coupled to the field.

The periodic density P(theta, tau) is carried as its Fourier coefficients
B_n = <e^{-i n theta}>, truncated at n_max with hard closure B_{n_max+1} = 0.
The hierarchy

    dB_n/dtau = i n (a B_{n-1} + a* B_{n+1}) - n^2 D B_n      (n >= 1)
    da/dtau   = B_1 - kappa a

is integrated with a fixed-step classical Runge-Kutta scheme. B_0 = 1 is a
constant of motion (probability conservation) and negative harmonics follow
from B_{-n} = B_n*. Diffusion damps harmonic n at rate n^2 D, which makes the
hard truncation accurate for the D ~ 1 regime of interest but also makes the
system stiff: dt must stay below ~2.8/(n_max^2 D) for RK4 stability, and the
integrator enforces a guard slightly inside that bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, IntegrationError, UndefinedPhaseError

DEFAULT_N_MAX = 32
DEFAULT_DT = 0.01
DEFAULT_SEED_FIELD = 1e-5
STIFFNESS_BOUND = 2.5     # dt * n_max^2 * D must stay below this
TAIL_TOL = 1e-8           # |B_{n_max}| above this flags under-resolution


@dataclass
class FourierState:
    """Truncated harmonic amplitudes plus the cavity field at scaled time tau."""

    modes: np.ndarray   # complex, modes[n] = B_n for n = 0..n_max
    a: complex
    tau: float = 0.0

    @property
    def n_max(self) -> int:
        return len(self.modes) - 1

    @property
    def bunching(self) -> float:
        return abs(self.modes[1])

    @property
    def mean_p(self) -> float:
        """<p> = -2 Re(a B_1*), from the adiabatic momentum balance."""
        return -2.0 * (self.a * np.conj(self.modes[1])).real

    def copy(self) -> "FourierState":
        return FourierState(self.modes.copy(), self.a, self.tau)


def new_state(n_max: int, a0: complex = DEFAULT_SEED_FIELD) -> FourierState:
    """Uniform density with a seeded field: B_0 = 1, B_n = 0 for n >= 1."""
    if n_max < 2:
        raise DomainError(f"n_max must be >= 2, got {n_max}")
    modes = np.zeros(n_max + 1, dtype=complex)
    modes[0] = 1.0
    return FourierState(modes=modes, a=complex(a0), tau=0.0)


def derivative(state: FourierState, kappa: float, D: float):
    """Right-hand side of the truncated hierarchy; returns (dmodes, da)."""
    n_max = state.n_max
    B = state.modes
    a = state.a
    n = np.arange(1, n_max + 1)
    B_up = np.empty(n_max, dtype=complex)
    B_up[:-1] = B[2:]
    B_up[-1] = 0.0                      # closure B_{n_max+1} = 0
    dB = np.zeros(n_max + 1, dtype=complex)
    dB[1:] = 1j * n * (a * B[:-1] + np.conj(a) * B_up) - (n * n) * D * B[1:]
    da = B[1] - kappa * a
    return dB, da


@dataclass
class Trajectory:
    """Sampled observables of one integration run."""

    tau: np.ndarray
    a: np.ndarray          # complex field samples
    bunching: np.ndarray   # |B_1|
    mean_p: np.ndarray     # -2 Re(a B_1*)
    under_resolved: bool = False
    tail_max: float = 0.0  # max |B_{n_max}| seen over the run

    @property
    def abs_a_sq(self) -> np.ndarray:
        return np.abs(self.a) ** 2

    @property
    def omega_inst(self) -> np.ndarray:
        """Per-sample frequency d(arg a)/dtau by centered differences."""
        phase = np.unwrap(np.angle(self.a))
        return np.gradient(phase, self.tau)

    def window(self, tau_min: float, tau_max: float) -> slice:
        i0 = int(np.searchsorted(self.tau, tau_min, side="left"))
        i1 = int(np.searchsorted(self.tau, tau_max, side="right"))
        return slice(i0, i1)


def stable_dt(n_max: int, D: float, requested: float = DEFAULT_DT) -> float:
    """Largest step not exceeding `requested` that satisfies the stiffness guard."""
    if D <= 0:
        return requested
    return min(requested, STIFFNESS_BOUND / (n_max * n_max * D) / 1.05)


def integrate(state: FourierState, kappa: float, D: float, dt: float,
              t_end: float, sample_every: int = 10):
    """Fixed-step RK4 integration from state.tau to state.tau + t_end.

    Returns (trajectory, final_state); `state` itself is not modified.
    Sampling happens every `sample_every` steps, always including the first
    and last point. NaN/overflow aborts; a tail harmonic above TAIL_TOL only
    flags the trajectory as under-resolved.
    """
    if dt <= 0 or t_end <= 0 or sample_every < 1:
        raise DomainError("dt, t_end must be > 0 and sample_every >= 1")
    if D > 0 and dt * state.n_max ** 2 * D >= STIFFNESS_BOUND:
        raise DomainError(
            f"dt={dt} violates the stiffness guard dt < "
            f"{STIFFNESS_BOUND / (state.n_max ** 2 * D):.3g} for n_max={state.n_max}, D={D}")

    B = state.modes.copy()
    a = state.a
    tau0 = state.tau
    n_steps = int(math.ceil(t_end / dt - 1e-12))

    n_max = state.n_max
    n = np.arange(1, n_max + 1)
    damp = (n * n).astype(float) * D

    def rhs(B, a):
        B_up = np.empty(n_max, dtype=complex)
        B_up[:-1] = B[2:]
        B_up[-1] = 0.0
        dB = np.zeros(n_max + 1, dtype=complex)
        dB[1:] = 1j * n * (a * B[:-1] + np.conj(a) * B_up) - damp * B[1:]
        return dB, B[1] - kappa * a

    taus, fields, bunch, meanp = [], [], [], []
    tail_max = 0.0

    def record(i):
        taus.append(tau0 + i * dt)
        fields.append(a)
        bunch.append(abs(B[1]))
        meanp.append(-2.0 * (a * np.conj(B[1])).real)

    for i in range(n_steps + 1):
        tail_max = max(tail_max, abs(B[-1]))
        if i % sample_every == 0 or i == n_steps:
            record(i)
        if i == n_steps:
            break
        k1B, k1a = rhs(B, a)
        k2B, k2a = rhs(B + 0.5 * dt * k1B, a + 0.5 * dt * k1a)
        k3B, k3a = rhs(B + 0.5 * dt * k2B, a + 0.5 * dt * k2a)
        k4B, k4a = rhs(B + dt * k3B, a + dt * k3a)
        B = B + (dt / 6.0) * (k1B + 2.0 * k2B + 2.0 * k3B + k4B)
        a = a + (dt / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        if not (np.all(np.isfinite(B.view(float))) and math.isfinite(abs(a))):
            raise IntegrationError(
                f"non-finite state at tau={tau0 + (i + 1) * dt:.4g} "
                f"(kappa={kappa}, D={D}, dt={dt}, n_max={n_max})")

    traj = Trajectory(tau=np.array(taus), a=np.array(fields),
                      bunching=np.array(bunch), mean_p=np.array(meanp),
                      under_resolved=tail_max > TAIL_TOL, tail_max=tail_max)
    final = FourierState(modes=B, a=a, tau=tau0 + n_steps * dt)
    return traj, final


def simulate(kappa: float, D: float, a0: complex = DEFAULT_SEED_FIELD,
             t_end: float = 250.0, n_max: int = DEFAULT_N_MAX,
             dt: float | None = None, sample_every: int | None = None,
             max_n_max: int = 512):
    """Convenience driver: integrate from the uniform seeded state, doubling
    n_max until the tail harmonic stays below TAIL_TOL."""
    while True:
        step = stable_dt(n_max, D, DEFAULT_DT if dt is None else dt)
        se = sample_every if sample_every is not None else max(1, int(round(0.1 / step)))
        traj, final = integrate(new_state(n_max, a0), kappa, D, step, t_end, se)
        if not traj.under_resolved or n_max >= max_n_max:
            return traj, final
        n_max *= 2


def instantaneous_frequency(traj: Trajectory, window: slice,
                            min_amplitude: float = 1e-12) -> float:
    """Least-squares slope of the unwrapped field phase over a sample window."""
    tau = traj.tau[window]
    a = traj.a[window]
    if tau.size < 2:
        raise DomainError("window must contain at least two samples")
    if np.min(np.abs(a)) < min_amplitude:
        raise UndefinedPhaseError(
            f"field magnitude below {min_amplitude} inside the window; phase undefined")
    phase = np.unwrap(np.angle(a))
    return float(np.polyfit(tau, phase, 1)[0])


def reconstruct_density(state: FourierState, theta_grid,
                        negativity_tol: float = 1e-6):
    """Synthesize P(theta) = (1/2pi) sum_n B_n e^{i n theta} on a grid.

    Uses B_{-n} = B_n*, so the result is real. Excursions below
    -negativity_tol indicate truncation failure and raise.
    """
    theta = np.asarray(theta_grid, dtype=float)
    n = np.arange(1, state.n_max + 1)
    # 1 + 2 Re sum_{n>=1} B_n e^{i n theta}
    phases = np.exp(1j * np.outer(theta, n))
    dens = (1.0 + 2.0 * (phases @ state.modes[1:]).real) / (2.0 * math.pi)
    if np.min(dens) < -negativity_tol:
        raise IntegrationError(
            f"reconstructed density dips to {np.min(dens):.3g}; increase n_max")
    return dens
