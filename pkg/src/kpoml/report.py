"""Matplotlib figure rendering for run reports.

Figures are written next to the delimited outputs (PNG, Agg backend, no
display needed).  Every function takes plain arrays so it can replot from
the CSV files as well.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 150
FIGSIZE = (6.4, 4.2)


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def save_fit_figure(
    path: str | Path,
    data_x: np.ndarray,
    data_y: np.ndarray,
    grid_x: np.ndarray,
    grid_f: np.ndarray,
    target_f: np.ndarray | None = None,
    title: str = "",
) -> Path:
    """Teacher data, fitted model curve, and (optionally) the target."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    if target_f is not None:
        ax.plot(grid_x, target_f, color="0.55", lw=1.0, ls="--", label="target")
    ax.plot(grid_x, grid_f, color="tab:orange", lw=1.6, label="model")
    ax.scatter(data_x, data_y, s=12, color="tab:blue", alpha=0.7, label="training data",
               zorder=3)
    ax.set_xlabel("x")
    ax.set_ylabel("f(x)")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(loc="best", fontsize=9)
    return _finish(fig, path)


def save_spectrum_figure(
    path: str | Path,
    nu: np.ndarray,
    amplitude: np.ndarray,
    target_amplitude: np.ndarray | None = None,
    title: str = "",
) -> Path:
    """|F(nu)| of the fitted curve against frequency."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    if target_amplitude is not None:
        ax.plot(nu, target_amplitude, color="0.55", lw=1.0, ls="--", label="target")
    ax.plot(nu, amplitude, color="tab:orange", lw=1.4, label="model")
    ax.set_xlabel(r"frequency $\nu$")
    ax.set_ylabel(r"$|\hat F(\nu)|$")
    ax.set_yscale("log")
    ax.set_ylim(bottom=max(1e-8, np.min(amplitude[amplitude > 0], initial=1e-8) / 10))
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3, which="both")
    ax.legend(loc="best", fontsize=9)
    return _finish(fig, path)


def save_preparation_figure(path: str | Path, times: np.ndarray, fidelities: np.ndarray) -> Path:
    """Fidelity with the target coherent state along the sweep."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(times, fidelities, color="tab:blue", lw=1.6)
    ax.axhline(0.99, color="0.6", ls=":", lw=1.0)
    ax.set_xlabel("time")
    ax.set_ylabel("fidelity with target coherent state")
    ax.set_ylim(0, 1.02)
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def save_sample_sweep_figure(
    path: str | Path,
    n_values: np.ndarray,
    train_mse: np.ndarray,
    test_mse: np.ndarray,
) -> Path:
    """Train and held-out MSE against the number of training points."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.loglog(n_values, train_mse, "o-", color="tab:blue", label="train MSE")
    ax.loglog(n_values, test_mse, "s-", color="tab:orange", label="test MSE")
    ax.set_xlabel("training samples N")
    ax.set_ylabel("MSE")
    ax.grid(alpha=0.3, which="both")
    ax.legend(loc="best", fontsize=9)
    return _finish(fig, path)


def save_alpha_sweep_figure(
    path: str | Path,
    alphas: list[float],
    spectra: list[tuple[np.ndarray, np.ndarray]],
    final_costs: list[float],
) -> Path:
    """Overlayed spectra of the trained models for each initial amplitude."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for alpha, (nu, amp), cost in zip(alphas, spectra, final_costs):
        ax.semilogy(nu, amp, lw=1.4, label=f"alpha={alpha:g} (cost {cost:.2e})")
    ax.set_xlabel(r"frequency $\nu$")
    ax.set_ylabel(r"$|\hat F(\nu)|$")
    ax.grid(alpha=0.3, which="both")
    ax.legend(loc="best", fontsize=9)
    return _finish(fig, path)
