"""Matplotlib figures written next to the CSV outputs (non-interactive backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (4.8, 3.4),
    "figure.dpi": 120,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.frameon": False,
    "savefig.bbox": "tight",
}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_trotter_scan(scan, path: str | Path) -> Path:
    """Infidelity against ``dt lambda_B`` on log axes, with a reference power law."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        x, y = np.asarray(scan.dt_lambda_B), np.asarray(scan.infidelity)
        mask = y > 0
        ax.loglog(x[mask], y[mask], "o-", label="faulty gates" if scan.faulty else f"order {scan.order}")
        if not scan.faulty and mask.sum() >= 2:
            p = 2 * scan.order
            ref = y[mask][-1] * (x[mask] / x[mask][-1]) ** p
            ax.loglog(x[mask], ref, "--", color="0.5", label=fr"$\propto \delta t^{p}$")
        ax.set_xlabel(r"$\delta t\,\lambda_B$")
        ax.set_ylabel(r"$1-\mathcal{F}$")
        ax.legend()
        return _save(fig, path)


def plot_quench(traj, path: str | Path) -> Path:
    """Norm-corrected energies (Trotter vs exact) and the norm."""
    with plt.rc_context(STYLE):
        fig, (ax, bx) = plt.subplots(2, 1, sharex=True, figsize=(4.8, 4.6))
        ax.plot(traj.t, traj.E_energy, "o", ms=3, color="C0", label="E (Trotter)")
        ax.plot(traj.t, traj.B_energy, "s", ms=3, color="C1", label="B (Trotter)")
        if traj.exact_E is not None:
            ax.plot(traj.t, traj.exact_E, "-", color="C0", lw=1, label="E (exact)")
            ax.plot(traj.t, traj.exact_B, "-", color="C1", lw=1, label="B (exact)")
        ax.set_ylabel("energy")
        ax.legend(ncol=2, fontsize=7)
        bx.plot(traj.t, traj.norm, "o-", ms=3, label="norm")
        bx.plot(traj.t, traj.fidelity, "s-", ms=3, label=r"$\mathcal{F}$")
        bx.set_xlabel("t")
        bx.legend()
        return _save(fig, path)


def plot_error_scan(surface, path: str | Path) -> Path:
    """Infidelity against ``Omega T``, one curve per decay rate."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for ig, g in enumerate(surface.gamma_ratio):
            y = np.asarray(surface.infidelity[ig])
            mask = y > 0
            ax.loglog(surface.omega_T[mask], y[mask], "o-", ms=3, label=fr"$\gamma/\Omega={g:g}$")
        ax.set_xlabel(r"$\Omega T$")
        ax.set_ylabel(r"$\epsilon$")
        ax.legend(fontsize=7)
        return _save(fig, path)


def plot_gate_fidelity(qudit: float, qubit: float, path: str | Path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.2, 3.0))
        ax.bar(["qudit", "qubit"], [qudit, qubit], color=["C0", "C3"])
        for k, v in enumerate((qudit, qubit)):
            ax.text(k, v, f"{100 * v:.1f}%", ha="center", va="bottom")
        ax.set_ylim(0, 1.1)
        ax.set_ylabel("state fidelity")
        return _save(fig, path)


def plot_cost(report: dict, path: str | Path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.2, 3.0))
        vals = [report["qudit_step_seconds"] * 1e3, report["qubit_step_seconds"] * 1e3]
        ax.bar(["qudit", "qubit"], vals, color=["C0", "C3"])
        ax.set_yscale("log")
        ax.set_ylabel("Trotter step duration (ms)")
        return _save(fig, path)
