"""Relaxation functions of the free damped particle.

``H(t)`` measures how the mean displacement remembers the initial velocity and
``h(t) = dH/dt`` how the mean velocity forgets it.  Both are available in the
damped-sinusoid closed form and through an independent ODE oracle obtained by
reducing the memory convolution to an auxiliary variable, which is exact for
the exponential kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from .kernel import KernelParams

__all__ = [
    "H_analytic",
    "h_analytic",
    "hdot_analytic",
    "h_phase_parts",
    "relaxation_ode_oracle",
    "RelaxationEvaluator",
]


def _check_nonnegative(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("t must be nonnegative")
    return t


def H_analytic(kernel: KernelParams, t):
    """Displacement memory H(t) = (1/gamma0)[1 - A e^{-t/2tau_c} sin(lam t + alpha)].

    H(0) = 0 and H -> 1/gamma0 as t -> infinity.
    """
    t = _check_nonnegative(t)
    a, lam, alpha = kernel.amplitude, kernel.lam, kernel.phase
    out = (1.0 - a * np.exp(-t / (2.0 * kernel.tau_c)) * np.sin(lam * t + alpha)) / kernel.gamma0
    return out if out.ndim else float(out)


def h_phase_parts(kernel: KernelParams, t):
    """Sinusoidal factors of h and hdot with the decaying envelope removed.

    Returns ``(num_h, num_hdot)`` such that::

        h(t)    = (A/gamma0) exp(-t/2tau_c) * num_h(t)
        hdot(t) = (A/gamma0) exp(-t/2tau_c) * num_hdot(t)

    The ratio ``num_hdot/num_h`` stays finite at large t where h itself
    underflows, which is what coefficient evaluations need.
    """
    t = np.asarray(t, dtype=float)
    lam, alpha, tau_c = kernel.lam, kernel.phase, kernel.tau_c
    theta = lam * t + alpha
    num_h = np.sin(theta) / (2.0 * tau_c) - lam * np.cos(theta)
    num_hdot = (lam * lam - 0.25 / tau_c**2) * np.sin(theta) + (lam / tau_c) * np.cos(theta)
    return num_h, num_hdot


def h_analytic(kernel: KernelParams, t):
    """Velocity memory h(t) = dH/dt; h(0) = 1 and h -> 0 with decaying oscillation."""
    t = _check_nonnegative(t)
    num_h, _ = h_phase_parts(kernel, t)
    out = (kernel.amplitude / kernel.gamma0) * np.exp(-t / (2.0 * kernel.tau_c)) * num_h
    return out if out.ndim else float(out)


def hdot_analytic(kernel: KernelParams, t):
    """Exact time derivative of h; hdot(0) = 0 because the kernel is bounded."""
    t = _check_nonnegative(t)
    _, num_hdot = h_phase_parts(kernel, t)
    out = (kernel.amplitude / kernel.gamma0) * np.exp(-t / (2.0 * kernel.tau_c)) * num_hdot
    return out if out.ndim else float(out)


def _rk4_step(state, dt, gamma0, tau_c):
    def rhs(s):
        big_h, h, z = s
        return np.array([h, -z, (gamma0 / tau_c) * h - z / tau_c])

    k1 = rhs(state)
    k2 = rhs(state + 0.5 * dt * k1)
    k3 = rhs(state + 0.5 * dt * k2)
    k4 = rhs(state + dt * k3)
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def relaxation_ode_oracle(kernel: KernelParams, t_grid, dt: float | None = None):
    """Fourth-order integration of the memory dynamics, independent of the
    closed-form algebra.

    The Volterra equation for h is reduced to the exact auxiliary system

        hdot = -z,   zdot = (gamma0/tau_c) h - z/tau_c,   Hdot = h

    with h(0) = 1, z(0) = 0, H(0) = 0, then stepped with classical RK4.

    Parameters
    ----------
    t_grid : array_like
        Ascending times starting at 0; values are reported exactly on it.
    dt : float, optional
        Internal step bound; defaults to min(tau_c, 1/gamma0)/200.

    Returns
    -------
    (H, h) : pair of ndarray
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1:
        raise ValueError("t_grid must be a 1-D array")
    if t_grid[0] != 0.0:
        raise ValueError("t_grid must start at 0")
    if np.any(np.diff(t_grid) <= 0.0):
        raise ValueError("t_grid must be strictly ascending")
    if dt is None:
        dt = min(kernel.tau_c, 1.0 / kernel.gamma0) / 200.0
    if not (dt > 0.0) or not math.isfinite(dt):
        raise ValueError(f"step size underflow: dt = {dt}")

    big_h = np.empty_like(t_grid)
    h = np.empty_like(t_grid)
    state = np.array([0.0, 1.0, 0.0])
    big_h[0], h[0] = state[0], state[1]
    for i in range(1, t_grid.size):
        span = t_grid[i] - t_grid[i - 1]
        n_sub = max(1, int(math.ceil(span / dt)))
        if n_sub > 10**8:
            raise ValueError(f"step size underflow: {n_sub} substeps required")
        sub = span / n_sub
        for _ in range(n_sub):
            state = _rk4_step(state, sub, kernel.gamma0, kernel.tau_c)
        big_h[i], h[i] = state[0], state[1]
    return big_h, h


@dataclass(frozen=True)
class RelaxationEvaluator:
    """Immutable evaluator for (H, h) in either closed form or via the ODE oracle."""

    kernel: KernelParams
    mode: str = "analytic"

    def __post_init__(self):
        if self.mode not in ("analytic", "ode_oracle"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def evaluate(self, t_grid):
        if self.mode == "analytic":
            t_grid = np.asarray(t_grid, dtype=float)
            return H_analytic(self.kernel, t_grid), h_analytic(self.kernel, t_grid)
        return relaxation_ode_oracle(self.kernel, t_grid)
