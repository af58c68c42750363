"""Matplotlib rendering of the report figures, saved to files next to the CSVs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fpmodes import FourierState, Trajectory, reconstruct_density
from .stability import InstabilityMap

DPI = 150


def _save(fig, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)


def render_instability_region(imap: InstabilityMap, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    ax.contourf(imap.kappa, imap.D, imap.unstable.T.astype(float),
                levels=[0.5, 1.5], colors=["0.7"])
    ax.contour(imap.kappa, imap.D, imap.margin.T, levels=[1.0],
               colors="k", linewidths=1.0)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(r"$\kappa$")
    ax.set_ylabel(r"$D$")
    ax.set_title("Instability region (shaded)")
    _save(fig, path)


def render_dynamics(traj: Trajectory, final_state: FourierState,
                    kappa: float, path: Path) -> None:
    theta = np.linspace(0.0, 2.0 * np.pi, 400)
    dens = reconstruct_density(final_state, theta)
    fig, axes = plt.subplots(2, 2, figsize=(8, 6.5))
    (ax_a, ax_b), (ax_w, ax_p) = axes
    ax_a.plot(traj.tau, traj.abs_a_sq, "k-")
    ax_a.set_xlabel(r"$\tau$")
    ax_a.set_ylabel(r"$|a|^2$")
    ax_b.plot(traj.tau, traj.bunching, "k-")
    ax_b.set_xlabel(r"$\tau$")
    ax_b.set_ylabel(r"$b$")
    ax_w.plot(traj.tau, traj.omega_inst / kappa, "k-", label=r"$\omega/\kappa$")
    ax_w.plot(traj.tau, -traj.mean_p / kappa, "k--",
              label=r"$-\langle p\rangle/\kappa$")
    ax_w.set_xlabel(r"$\tau$")
    ax_w.legend(frameon=False)
    ax_p.plot(theta, dens, "k-")
    ax_p.set_xlabel(r"$\theta$")
    ax_p.set_ylabel(r"$P(\theta)$")
    ax_p.set_xlim(0, 2 * np.pi)
    fig.tight_layout()
    _save(fig, path)


def render_steady_sweep(D, b_exact, b_gauss, omega_over_kappa,
                        minus_p_over_kappa, path: Path) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.4))
    ax1.plot(D, b_exact, "k-", label="exact")
    gauss = np.asarray(b_gauss, dtype=float)
    ax1.plot(D, gauss, "k--", label="Gaussian ansatz")
    ax1.set_xlabel(r"$D$")
    ax1.set_ylabel(r"$b$")
    ax1.legend(frameon=False)
    ax2.plot(D, minus_p_over_kappa, "k-", label=r"$-\langle p\rangle/\kappa$")
    ax2.plot(D, omega_over_kappa, "k--", label=r"$\omega/\kappa$")
    ax2.set_xlabel(r"$D$")
    ax2.legend(frameon=False)
    fig.tight_layout()
    _save(fig, path)


def render_ramp(ratio, omega_over_kappa, a_sq, path: Path) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.4))
    ax1.plot(ratio, omega_over_kappa, "k-")
    ax1.set_xlabel(r"$P_0/P_T$")
    ax1.set_ylabel(r"$\omega/\kappa$")
    ax2.plot(ratio, a_sq, "k-")
    ax2.set_xlabel(r"$P_0/P_T$")
    ax2.set_ylabel(r"$|a|^2$")
    fig.tight_layout()
    _save(fig, path)
