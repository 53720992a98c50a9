"""Time-dependent Fokker-Planck coefficients, the Gaussian phase-space
density, the quantum diffusion coefficient and the configuration-space
marginal of the free damped particle.

The drift coefficient is the logarithmic decay rate of the velocity memory,
``xi(t) = -hdot/h``.  Because h oscillates, xi has poles at the zeros of h;
these are surfaced (flag, then error) rather than regularized.  The pole test
uses the envelope-normalized oscillation of h, so the harmless uniform decay
``exp(-t/2tau_c)`` at large times does not trip it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoefficientSingularityError, ConvergenceError
from .kernel import KernelParams, ThermalState
from .relaxation import H_analytic, h_analytic, h_phase_parts
from .variances import VarianceCalculator

__all__ = [
    "FpeCoefficients",
    "GaussianPhaseState",
    "fpe_coefficients",
    "delta0",
    "joint_density",
    "quantum_diffusion_coefficient",
    "marginal_density",
    "marginal_variance",
    "phase_state",
]

# |normalized h| below which xi is flagged / refused
_SINGULAR_FLAG = 1e-9
_SINGULAR_ERROR = 1e-12


@dataclass(frozen=True)
class FpeCoefficients:
    """Drift and diffusion coefficients of the phase-space evolution at time t.

    ``near_singular`` marks evaluations inside the flagged window around a
    zero of h, where xi is large and the coefficient set is unreliable.
    """

    t: float
    xi: float
    phi: float
    psi: float
    near_singular: bool = False


def _normalized_h_oscillation(kernel: KernelParams, t: float) -> tuple[float, float, float]:
    """(h_hat, xi, hdot_hat): envelope-free oscillation of h, and -hdot/h."""
    num_h, num_hdot = h_phase_parts(kernel, t)
    scale = math.hypot(0.5 / kernel.tau_c, kernel.lam)
    h_hat = float(num_h) / scale
    if abs(h_hat) < _SINGULAR_ERROR:
        raise CoefficientSingularityError(
            f"h(t) crosses zero near t = {t:g}; xi = -hdot/h diverges there"
        )
    xi = -float(num_hdot) / float(num_h)
    return h_hat, xi, float(num_hdot) / scale


def fpe_coefficients(
    kernel: KernelParams,
    thermal: ThermalState,
    t: float,
    omega_max: float | None = None,
    calculator: VarianceCalculator | None = None,
) -> FpeCoefficients:
    """Coefficients (xi, phi, psi) assembled from the relaxation functions and
    the analytic-derivative variance channels.

    Raises
    ------
    CoefficientSingularityError
        Within ~1e-12 of a zero of the velocity memory h.
    """
    t = float(t)
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    h_hat, xi, _ = _normalized_h_oscillation(kernel, t)
    calc = calculator or VarianceCalculator(kernel, thermal, omega_max=omega_max, t_max=max(t, 1.0))
    p = calc.point(t)
    phi = xi * p.svv + 0.5 * p.dsvv_dt
    psi = -p.svv + xi * p.sxv + p.dsxv_dt
    return FpeCoefficients(t=t, xi=xi, phi=phi, psi=psi, near_singular=abs(h_hat) < _SINGULAR_FLAG)


def _ratio_phi_over_xi(
    kernel: KernelParams, calc: VarianceCalculator, t: float
) -> float:
    """phi/xi evaluated in pole-free form: svv - 0.5*dsvv*h/hdot."""
    num_h, num_hdot = h_phase_parts(kernel, t)
    p = calc.point(t)
    return p.svv - 0.5 * p.dsvv_dt * float(num_h) / float(num_hdot)


def _nudge_off_zeros(kernel: KernelParams, t: float) -> float:
    """Move t forward a fraction of the oscillation period away from zeros of
    both h and hdot."""
    scale = math.hypot(0.5 / kernel.tau_c, kernel.lam)
    best, best_q = t, -1.0
    for j in range(8):
        cand = t + j * math.pi / (8.0 * kernel.lam)
        num_h, num_hdot = h_phase_parts(kernel, cand)
        q = min(abs(float(num_h)), abs(float(num_hdot))) / scale
        if q > best_q:
            best, best_q = cand, q
    return best


def delta0(
    kernel: KernelParams,
    thermal: ThermalState,
    t_inf: float | None = None,
    tol: float = 1e-3,
    omega_max: float | None = None,
) -> float:
    """Stationary width of the velocity distribution, the long-time limit of
    phi(t)/xi(t).

    Evaluated at a geometric ladder of late times (t_inf and its halvings, or
    the default ladder {20, 40, 80}/min(gamma0, 1/tau_c)); successive values
    must agree to ``tol`` relative or a ConvergenceError carrying the last two
    iterates is raised.  In the classical limit the result is kbt.
    """
    rate = min(kernel.gamma0, 1.0 / kernel.tau_c)
    if t_inf is None:
        ladder = [20.0 / rate, 40.0 / rate, 80.0 / rate]
    else:
        if t_inf <= 0.0:
            raise ValueError("t_inf must be positive")
        ladder = [0.25 * t_inf, 0.5 * t_inf, t_inf]
    calc = VarianceCalculator(kernel, thermal, omega_max=omega_max, t_max=ladder[-1])
    values = [_ratio_phi_over_xi(kernel, calc, _nudge_off_zeros(kernel, t)) for t in ladder]
    for prev, cur in zip(values[:-1], values[1:]):
        scale = max(abs(cur), 1e-300)
        if abs(cur - prev) > tol * scale:
            raise ConvergenceError(
                f"phi/xi not converged: last iterates {prev:.6e}, {cur:.6e}",
                iterates=(prev, cur),
            )
    return values[-1]


@dataclass(frozen=True)
class GaussianPhaseState:
    """Mean and covariance of the Gaussian phase-space density at one time."""

    mean_x: float
    mean_v: float
    sxx: float
    svv: float
    sxv: float

    @property
    def determinant(self) -> float:
        return self.sxx * self.svv - self.sxv**2


def phase_state(
    kernel: KernelParams,
    thermal: ThermalState,
    x0: float,
    v0: float,
    t: float,
    omega_max: float | None = None,
) -> GaussianPhaseState:
    """Phase-space state evolved from sharp initial conditions (x0, v0).

    Means follow the relaxation functions; the covariance comes from the
    variance oracle.
    """
    calc = VarianceCalculator(kernel, thermal, omega_max=omega_max, t_max=max(float(t), 1.0))
    p = calc.point(t)
    return GaussianPhaseState(
        mean_x=x0 + v0 * H_analytic(kernel, t),
        mean_v=v0 * h_analytic(kernel, t),
        sxx=p.sxx,
        svv=p.svv,
        sxv=p.sxv,
    )


def joint_density(state: GaussianPhaseState, x, v):
    """Bivariate Gaussian density of (position, velocity) mean values."""
    det = state.determinant
    if det <= 0.0:
        raise ValueError(f"degenerate covariance: determinant {det:.3e} <= 0")
    dx = np.asarray(x, dtype=float) - state.mean_x
    dv = np.asarray(v, dtype=float) - state.mean_v
    quad = (state.svv * dx * dx - 2.0 * state.sxv * dx * dv + state.sxx * dv * dv) / det
    out = np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))
    return out if np.ndim(out) else float(out)


def quantum_diffusion_coefficient(
    kernel: KernelParams,
    thermal: ThermalState,
    t: float,
    delta0_value: float,
    omega_max: float | None = None,
    calculator: VarianceCalculator | None = None,
) -> float:
    """Time-dependent diffusion coefficient of the configuration-space
    equation: sxv(t) + delta0 * H(t) * h(t)."""
    t = float(t)
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    calc = calculator or VarianceCalculator(kernel, thermal, omega_max=omega_max, t_max=max(t, 1.0))
    sxv = calc.point(t).sxv
    return sxv + delta0_value * H_analytic(kernel, t) * h_analytic(kernel, t)


def marginal_variance(
    kernel: KernelParams,
    thermal: ThermalState,
    t: float,
    delta0_value: float,
    omega_max: float | None = None,
    calculator: VarianceCalculator | None = None,
) -> float:
    """Width of the configuration-space marginal: sxx(t) + delta0 * H(t)^2."""
    calc = calculator or VarianceCalculator(
        kernel, thermal, omega_max=omega_max, t_max=max(float(t), 1.0)
    )
    return calc.point(t).sxx + delta0_value * H_analytic(kernel, t) ** 2


def marginal_density(
    kernel: KernelParams,
    thermal: ThermalState,
    x0: float,
    t: float,
    x,
    delta0_value: float,
    omega_max: float | None = None,
) -> float:
    """Configuration-space density for a Maxwellian-distributed initial
    velocity of width delta0: a Gaussian of variance sxx + delta0*H^2 about x0.

    Its variance grows at exactly twice the quantum diffusion coefficient.
    """
    var = marginal_variance(kernel, thermal, t, delta0_value, omega_max)
    if var < 1e-14:
        raise ValueError(f"marginal variance {var:.3e} below representable floor at t = {t:g}")
    dx = np.asarray(x, dtype=float) - x0
    out = np.exp(-0.5 * dx * dx / var) / math.sqrt(2.0 * math.pi * var)
    return out if np.ndim(out) else float(out)
