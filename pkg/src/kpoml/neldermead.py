"""Derivative-free Nelder-Mead simplex minimization.

Implements the classic reflection / expansion / contraction / shrink cycle
with non-adaptive coefficients (1, 2, 0.5, 0.5), the 1.05-or-2.5e-4 initial
simplex, and the dual max-norm tolerance test (both the x spread and the f
spread over the simplex must fall below tolerance).  These choices mirror
the de-facto standard simplex tool so iteration counts are comparable
across studies.

One iteration is one simplex update cycle; cost-function evaluations are
counted separately in the trace.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class CostEvaluationError(RuntimeError):
    """The cost function returned a non-finite value."""

    def __init__(self, value: float, theta: np.ndarray):
        super().__init__(f"cost returned non-finite value {value!r}")
        self.value = value
        self.theta = np.array(theta)


@dataclass(frozen=True)
class NmConfig:
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    x_tolerance: float = 1e-4
    f_tolerance: float = 1e-4
    max_iterations: int | None = None  # None -> 200 * n_parameters

    def __post_init__(self):
        if self.reflection <= 0:
            raise ValueError("reflection coefficient must be positive")
        if self.expansion <= self.reflection:
            raise ValueError("expansion coefficient must exceed reflection")
        if not 0 < self.contraction < 1:
            raise ValueError("contraction coefficient must be in (0, 1)")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink coefficient must be in (0, 1)")
        if self.x_tolerance <= 0 or self.f_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    def resolved_max_iterations(self, n_parameters: int) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        return 200 * n_parameters


@dataclass(frozen=True)
class OptimTrace:
    """Result of a minimization run.

    ``best_costs[i]`` is the best simplex vertex after i update cycles
    (entry 0 is the initial simplex best), so the sequence is
    non-increasing and has length ``iterations + 1``.
    """

    best_costs: np.ndarray
    final_theta: np.ndarray
    final_cost: float
    iterations: int
    n_evaluations: int
    reason: str  # "tolerance" | "max-iterations"


def initial_simplex(theta0: np.ndarray) -> np.ndarray:
    """Vertex j perturbs coordinate j of theta0 by a factor 1.05, or sets it
    to 2.5e-4 when the coordinate is zero."""
    theta0 = np.asarray(theta0, dtype=float)
    n = theta0.size
    sim = np.empty((n + 1, n), dtype=float)
    sim[0] = theta0
    for k in range(n):
        y = theta0.copy()
        if y[k] != 0.0:
            y[k] *= 1.05
        else:
            y[k] = 2.5e-4
        sim[k + 1] = y
    return sim


def minimize(
    cost: Callable[[np.ndarray], float],
    theta0: np.ndarray,
    config: NmConfig | None = None,
) -> OptimTrace:
    """Minimize ``cost`` starting from ``theta0``.

    Terminates when both the max-norm x spread and the f spread of the
    simplex fall below the configured tolerances, or after
    ``max_iterations`` update cycles.  Raises CostEvaluationError the
    moment the cost returns a non-finite value.
    """
    config = config or NmConfig()
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.ndim != 1 or theta0.size == 0:
        raise ValueError("theta0 must be a non-empty 1-D vector")
    n = theta0.size
    maxiter = config.resolved_max_iterations(n)
    rho = config.reflection
    chi = config.expansion
    psi = config.contraction
    sigma = config.shrink

    n_evals = 0

    def f(x: np.ndarray) -> float:
        nonlocal n_evals
        n_evals += 1
        val = float(cost(x))
        if not np.isfinite(val):
            raise CostEvaluationError(val, x)
        return val

    sim = initial_simplex(theta0)
    fsim = np.array([f(v) for v in sim])
    order = np.argsort(fsim, kind="stable")
    sim, fsim = sim[order], fsim[order]

    iterations = 0
    best_costs = [fsim[0]]
    reason = "max-iterations"
    while True:
        if (
            np.max(np.abs(sim[1:] - sim[0])) <= config.x_tolerance
            and np.max(np.abs(fsim[0] - fsim[1:])) <= config.f_tolerance
        ):
            reason = "tolerance"
            break
        if iterations >= maxiter:
            reason = "max-iterations"
            break

        xbar = sim[:-1].mean(axis=0)
        xr = (1 + rho) * xbar - rho * sim[-1]
        fxr = f(xr)
        do_shrink = False
        if fxr < fsim[0]:
            xe = (1 + rho * chi) * xbar - rho * chi * sim[-1]
            fxe = f(xe)
            if fxe < fxr:
                sim[-1], fsim[-1] = xe, fxe
            else:
                sim[-1], fsim[-1] = xr, fxr
        elif fxr < fsim[-2]:
            sim[-1], fsim[-1] = xr, fxr
        else:
            if fxr < fsim[-1]:
                xc = (1 + psi * rho) * xbar - psi * rho * sim[-1]
                fxc = f(xc)
                if fxc <= fxr:
                    sim[-1], fsim[-1] = xc, fxc
                else:
                    do_shrink = True
            else:
                xcc = (1 - psi) * xbar + psi * sim[-1]
                fxcc = f(xcc)
                if fxcc < fsim[-1]:
                    sim[-1], fsim[-1] = xcc, fxcc
                else:
                    do_shrink = True
            if do_shrink:
                for j in range(1, n + 1):
                    sim[j] = sim[0] + sigma * (sim[j] - sim[0])
                    fsim[j] = f(sim[j])

        order = np.argsort(fsim, kind="stable")
        sim, fsim = sim[order], fsim[order]
        iterations += 1
        best_costs.append(fsim[0])

    return OptimTrace(
        best_costs=np.asarray(best_costs),
        final_theta=sim[0].copy(),
        final_cost=float(fsim[0]),
        iterations=iterations,
        n_evaluations=n_evals,
        reason=reason,
    )
