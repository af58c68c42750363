import math

import numpy as np
import pytest

from viscarl import (derivative, dispersion_roots, instantaneous_frequency,
                     integrate, new_state, reconstruct_density, simulate)
from viscarl.errors import DomainError, UndefinedPhaseError
from viscarl.fpmodes import stable_dt


def test_new_state_is_uniform_and_seeded():
    s = new_state(16, 1e-5)
    assert s.modes[0] == 1.0
    assert np.all(s.modes[1:] == 0.0)
    assert s.bunching == 0.0
    assert abs(s.a) ** 2 == pytest.approx(1e-10)
    assert s.tau == 0.0


def test_new_state_minimal_and_invalid():
    assert new_state(2).n_max == 2
    with pytest.raises(DomainError):
        new_state(1)


def test_zero_field_is_fixed_point():
    s = new_state(8, 0.0)
    dB, da = derivative(s, 0.3, 1.0)
    assert np.all(dB == 0.0)
    assert da == 0.0


def test_diffusive_decay_with_zero_field():
    s = new_state(8, 0.0)
    s.modes[1:] = 0.1
    dB, _ = derivative(s, 0.3, 2.0)
    n = np.arange(1, 9)
    assert dB[1:] == pytest.approx(-n * n * 2.0 * 0.1)
    assert dB[0] == 0.0


def test_empty_cavity_decay():
    s = new_state(8, 1e-3)
    dB, da = derivative(s, 0.25, 1.0)
    assert da == pytest.approx(-0.25 * 1e-3)


def test_linearized_eigenvalues_match_dispersion_roots():
    # 2x2 system in (B_1, a): dB_1 = i a - D B_1, da = B_1 - kappa a
    kappa, D = 0.075, 1.49
    J = np.array([[-D, 1j], [1.0, -kappa]])
    eig = np.linalg.eigvals(J)
    r = dispersion_roots(kappa, D)
    got = sorted(eig, key=lambda z: z.real)
    assert abs(got[1] - r.lambda_plus) < 1e-10
    assert abs(got[0] - r.lambda_minus) < 1e-10


def test_numerical_jacobian_of_hierarchy_matches_dispersion():
    # finite-difference linearization of the full derivative about the
    # trivial state, restricted to the (Re/Im B_1, Re/Im a) block
    kappa, D = 0.1, 0.8
    eps = 1e-7

    def pack(x):
        s = new_state(8, complex(x[2], x[3]))
        s.modes[1] = complex(x[0], x[1])
        return s

    def rhs(x):
        dB, da = derivative(pack(x), kappa, D)
        return np.array([dB[1].real, dB[1].imag, da.real, da.imag])

    J = np.empty((4, 4))
    for j in range(4):
        e = np.zeros(4)
        e[j] = eps
        J[:, j] = (rhs(e) - rhs(-e)) / (2 * eps)
    # reassemble the complex 2x2 from the real 4x4 blocks
    A = np.array([[complex(J[0, 0], J[1, 0]), complex(J[0, 2], J[1, 2])],
                  [complex(J[2, 0], J[3, 0]), complex(J[2, 2], J[3, 2])]])
    eig = sorted(np.linalg.eigvals(A), key=lambda z: z.real)
    r = dispersion_roots(kappa, D)
    assert abs(eig[1] - r.lambda_plus) < 1e-6
    assert abs(eig[0] - r.lambda_minus) < 1e-6


@pytest.fixture(scope="module")
def fig2_run():
    return simulate(0.075, 1.49, a0=1e-5, t_end=250.0, n_max=32)


def test_exponential_growth_slope(fig2_run):
    traj, _ = fig2_run
    mask = (np.abs(traj.a) > 1e-4) & (np.abs(traj.a) < 1e-2)
    slope = np.polyfit(traj.tau[mask], np.log(traj.abs_a_sq[mask]), 1)[0]
    assert slope == pytest.approx(0.2343549466, rel=1e-3)


def test_long_time_matches_steady_solver(fig2_run):
    from viscarl import solve_steady
    traj, final = fig2_run
    sol = solve_steady(0.075, 1.49)
    w = instantaneous_frequency(traj, traj.window(230.0, 250.0))
    assert final.bunching == pytest.approx(sol.b, abs=1e-3)
    assert w == pytest.approx(sol.omega, abs=1e-3)
    assert abs(final.a) ** 2 == pytest.approx(sol.abs_a_sq, abs=1e-3)


def test_steady_momentum_identity(fig2_run):
    traj, final = fig2_run
    w = instantaneous_frequency(traj, traj.window(230.0, 250.0))
    b = final.bunching
    assert final.mean_p == pytest.approx(
        -2 * 0.075 * b * b / (0.075 ** 2 + w ** 2), abs=1e-3)


def test_b0_conserved(fig2_run):
    _, final = fig2_run
    assert abs(final.modes[0] - 1.0) < 1e-12


def test_stable_regime_decays():
    traj, final = simulate(1.0, 5.0, a0=1e-5, t_end=50.0, n_max=16)
    assert abs(final.a) ** 2 < 1e-12
    assert np.all(np.diff(traj.abs_a_sq[5:]) <= 1e-20)


def test_truncation_convergence():
    _, f32 = simulate(0.075, 1.49, t_end=150.0, n_max=32)
    _, f64 = simulate(0.075, 1.49, t_end=150.0, n_max=64)
    assert abs(f64.bunching - f32.bunching) < 1e-6
    assert abs(abs(f64.a) ** 2 - abs(f32.a) ** 2) < 1e-6


def test_gauge_covariance():
    # rotating the initial data by theta0 rotates the whole trajectory
    kappa, D, theta0 = 0.075, 1.49, 0.7
    s1 = new_state(16, 1e-3)
    s1.modes[1] = 0.01 + 0.005j
    s2 = s1.copy()
    s2.a *= np.exp(-1j * theta0)
    s2.modes[1:] *= np.exp(-1j * theta0 * np.arange(1, 17))
    dt = stable_dt(16, D)
    t1, f1 = integrate(s1, kappa, D, dt, 20.0, 50)
    t2, f2 = integrate(s2, kappa, D, dt, 20.0, 50)
    assert np.allclose(t2.a, t1.a * np.exp(-1j * theta0), rtol=0, atol=1e-12)
    phases = np.exp(-1j * theta0 * np.arange(17))
    assert np.allclose(f2.modes, f1.modes * phases, rtol=0, atol=1e-12)
    # gauge-invariant observables are bitwise-comparable up to rounding
    assert np.allclose(t2.bunching, t1.bunching, atol=1e-13)


def test_linear_regime_fidelity():
    # for tiny amplitudes the nonlinear terms are second order
    kappa, D = 0.1, 1.0
    s = new_state(8, 1e-4)
    s.modes[1] = 5e-5
    dB, da = derivative(s, kappa, D)
    lin_dB1 = 1j * s.a - D * s.modes[1]
    assert abs(dB[1] - lin_dB1) < 5 * abs(s.a) * abs(s.modes[1])
    assert da == pytest.approx(s.modes[1] - kappa * s.a)


def test_instantaneous_frequency_exact_ramp():
    tau = np.arange(0, 10, 0.1)
    from viscarl.fpmodes import Trajectory
    a = 0.3 * np.exp(1j * 0.5 * tau)
    traj = Trajectory(tau=tau, a=a, bunching=np.zeros_like(tau),
                      mean_p=np.zeros_like(tau))
    w = instantaneous_frequency(traj, slice(0, len(tau)))
    assert w == pytest.approx(0.5, abs=1e-10)


def test_instantaneous_frequency_constant_field_is_zero():
    tau = np.arange(0, 5, 0.1)
    from viscarl.fpmodes import Trajectory
    a = np.full_like(tau, 0.2, dtype=complex)
    traj = Trajectory(tau=tau, a=a, bunching=np.zeros_like(tau),
                      mean_p=np.zeros_like(tau))
    assert instantaneous_frequency(traj, slice(0, len(tau))) == pytest.approx(0.0)


def test_instantaneous_frequency_rejects_vanishing_field():
    tau = np.arange(0, 5, 0.1)
    from viscarl.fpmodes import Trajectory
    a = np.zeros_like(tau, dtype=complex)
    traj = Trajectory(tau=tau, a=a, bunching=np.zeros_like(tau),
                      mean_p=np.zeros_like(tau))
    with pytest.raises(UndefinedPhaseError):
        instantaneous_frequency(traj, slice(0, len(tau)), min_amplitude=1e-6)


def test_density_uniform():
    s = new_state(8, 0.0)
    theta = np.linspace(0, 2 * np.pi, 100, endpoint=False)
    dens = reconstruct_density(s, theta)
    assert dens == pytest.approx(np.full(100, 1 / (2 * np.pi)))


def test_density_single_harmonic():
    s = new_state(8, 0.0)
    s.modes[1] = 0.5
    theta = np.linspace(0, 2 * np.pi, 512, endpoint=False)
    dens = reconstruct_density(s, theta)
    expected = (1 + np.cos(theta)) / (2 * np.pi)
    assert dens == pytest.approx(expected, abs=1e-12)
    assert np.min(dens) >= -1e-12
    assert np.trapezoid(np.append(dens, dens[0]),
                    np.append(theta, 2 * np.pi)) == pytest.approx(1.0, abs=1e-10)


def test_density_normalization_at_steady_state(fig2_run):
    _, final = fig2_run
    theta = np.linspace(0, 2 * np.pi, 1024, endpoint=False)
    dens = reconstruct_density(final, theta)
    integral = np.trapezoid(np.append(dens, dens[0]), np.append(theta, 2 * np.pi))
    assert integral == pytest.approx(1.0, abs=1e-10)
    assert np.min(dens) > -1e-6
    # single-peaked traveling grating
    assert np.max(dens) > 2 / (2 * np.pi)


def test_stiffness_guard_rejects_large_dt():
    with pytest.raises(DomainError):
        integrate(new_state(32, 1e-5), 0.075, 1.49, 0.01, 1.0, 1)


def test_under_resolution_is_flagged():
    # D small enough that n_max = 4 cannot hold the harmonic tail
    traj, _ = integrate(new_state(4, 0.1), 0.1, 0.05, 0.01, 80.0, 100)
    assert traj.under_resolved
