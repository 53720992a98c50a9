"""Exponential memory kernel, its Lorentzian spectrum and the quantum noise
autocorrelation that couples them through the fluctuation-dissipation relation.

All quantities use units with mass = 1; ``hbar`` and ``kB`` default to 1 and are
configurable through :class:`ThermalState`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DivergentIntegralError

__all__ = [
    "KernelParams",
    "DerivedKernelConstants",
    "ThermalState",
    "memory_kernel",
    "spectral_density",
    "noise_correlation",
    "noise_correlation_cutoff_pair",
    "classical_correlation",
    "default_correlation_cutoff",
]

# occupation factor switches to its small-argument series below this x = hbar*w/(2 kBT)
_OCC_SERIES_CUTOFF = 1e-4


@dataclass(frozen=True)
class KernelParams:
    """Exponentially correlated friction kernel.

    Parameters
    ----------
    gamma0 : float
        Total friction strength (1/time); the kernel integrates to ``gamma0``.
    tau_c : float
        Correlation time of the friction/noise (time).

    Notes
    -----
    Only the oscillatory kernel regime ``4*gamma0*tau_c > 1`` is admitted, so
    the relaxation function has a real modulation frequency.  Construction
    fails outside that regime.
    """

    gamma0: float
    tau_c: float

    def __post_init__(self):
        if not (self.gamma0 > 0.0):
            raise ValueError(f"gamma0 must be positive, got {self.gamma0}")
        if not (self.tau_c > 0.0):
            raise ValueError(f"tau_c must be positive, got {self.tau_c}")
        if not (4.0 * self.gamma0 * self.tau_c > 1.0):
            raise ValueError(
                "overdamped kernel regime: need 4*gamma0*tau_c > 1, got "
                f"4*{self.gamma0}*{self.tau_c} = {4.0 * self.gamma0 * self.tau_c:g}"
            )

    @property
    def lam(self) -> float:
        """Modulation frequency of the relaxation function (1/time)."""
        return math.sqrt(self.gamma0 / self.tau_c - 0.25 / self.tau_c**2)

    @property
    def amplitude(self) -> float:
        """Dimensionless amplitude gamma0/lam of the relaxation envelope."""
        return self.gamma0 / self.lam

    @property
    def phase(self) -> float:
        """Phase offset (radians), placed in the quadrant that makes
        ``amplitude*sin(phase) = 1`` hold exactly."""
        return math.atan2(2.0 * self.lam * self.tau_c, 1.0 - 2.0 * self.gamma0 * self.tau_c)

    def derived_constants(self) -> "DerivedKernelConstants":
        return DerivedKernelConstants(self.amplitude, self.lam, self.phase, self.gamma0, self.tau_c)


@dataclass(frozen=True)
class DerivedKernelConstants:
    """Amplitude, frequency and phase of the damped-sinusoid relaxation form."""

    amp: float
    lam: float
    alpha: float
    gamma0: float
    tau_c: float

    def __post_init__(self):
        if not (self.lam > 0.0):
            raise ValueError(f"modulation frequency must be positive, got {self.lam}")
        # amp*sin(alpha) = 1 makes the displacement memory vanish at t = 0
        residual = self.amp * math.sin(self.alpha) - 1.0
        if abs(residual) > 1e-12:
            raise ValueError(f"inconsistent constants: amp*sin(alpha) - 1 = {residual:.3e}")
        # the same constants must give unit initial velocity memory
        h0 = (self.amp / self.gamma0) * (
            math.sin(self.alpha) / (2.0 * self.tau_c) - self.lam * math.cos(self.alpha)
        )
        if abs(h0 - 1.0) > 1e-12:
            raise ValueError(f"inconsistent constants: h(0) - 1 = {h0 - 1.0:.3e}")


@dataclass(frozen=True)
class ThermalState:
    """Bath temperature expressed as thermal energy, plus unit constants.

    ``kbt = 0`` is the vacuum limit and is fully supported: the occupation
    factor then reduces to 1 for every positive frequency.
    """

    kbt: float
    hbar: float = 1.0
    kb: float = 1.0

    def __post_init__(self):
        if self.kbt < 0.0:
            raise ValueError(f"kbt must be nonnegative, got {self.kbt}")
        if self.hbar <= 0.0 or self.kb <= 0.0:
            raise ValueError("hbar and kb must be positive")

    def occupation(self, omega):
        """hbar*omega*coth(hbar*omega / 2 kBT), with its removable limits.

        Tends to ``2*kbt`` as omega -> 0 (for kbt > 0) and to ``hbar*omega``
        in the vacuum limit; both are handled by a series switch so the value
        is smooth across the crossover.
        """
        omega = np.asarray(omega, dtype=float)
        if self.kbt == 0.0:
            return self.hbar * omega
        x = self.hbar * omega / (2.0 * self.kbt)
        out = np.empty_like(x)
        small = np.abs(x) < _OCC_SERIES_CUTOFF
        xs = x[small]
        # x*coth(x) = 1 + x^2/3 - x^4/45 + ...
        out[small] = 2.0 * self.kbt * (1.0 + xs * xs / 3.0 - xs**4 / 45.0)
        xl = x[~small]
        out[~small] = self.hbar * omega[~small] / np.tanh(xl)
        return out if out.ndim else float(out)

    def bose_occupancy(self, omega: float) -> float:
        """Mean thermal quantum number of a mode at frequency omega."""
        if omega <= 0.0:
            raise ValueError(f"omega must be positive, got {omega}")
        if self.kbt == 0.0:
            return 0.0
        x = self.hbar * omega / self.kbt
        return 1.0 / math.expm1(x)


def memory_kernel(kernel: KernelParams, t):
    """Friction kernel (gamma0/tau_c) * exp(-|t|/tau_c); even in t."""
    t = np.asarray(t, dtype=float)
    out = (kernel.gamma0 / kernel.tau_c) * np.exp(-np.abs(t) / kernel.tau_c)
    return out if out.ndim else float(out)


def spectral_density(kernel: KernelParams, omega):
    """Coupling-weighted density of bath modes, (2/pi)*gamma0/(1 + omega^2 tau_c^2).

    Its cosine transform over omega reproduces :func:`memory_kernel`.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0.0):
        raise ValueError("omega must be nonnegative")
    out = (2.0 / np.pi) * kernel.gamma0 / (1.0 + (omega * kernel.tau_c) ** 2)
    return out if out.ndim else float(out)


def default_correlation_cutoff(kernel: KernelParams) -> float:
    """Default frequency cutoff used by :func:`noise_correlation`."""
    return 100.0 / kernel.tau_c


def _correlation_envelope(kernel: KernelParams, thermal: ThermalState):
    """Smooth (non-oscillatory) part of the noise-correlation integrand."""

    def f(omega):
        occ = thermal.occupation(np.atleast_1d(omega))[0]
        return 0.5 * spectral_density(kernel, omega) * occ

    return f


def noise_correlation(
    kernel: KernelParams,
    thermal: ThermalState,
    tau: float,
    omega_max: float | None = None,
) -> float:
    """Quantum noise autocorrelation C(tau), truncated at ``omega_max``.

    Evaluates the half-line cosine transform of the occupation-weighted
    spectrum with oscillation-aware adaptive quadrature.  In the high
    temperature regime the result approaches ``kbt * memory_kernel(tau)``.

    Raises
    ------
    DivergentIntegralError
        For ``tau = 0`` in the vacuum limit: the integrand decays only as
        1/omega there, so C(0) is logarithmically cutoff-dependent and has
        no physical value to report.
    """
    if omega_max is None:
        omega_max = default_correlation_cutoff(kernel)
    if omega_max <= 0.0:
        raise ValueError(f"omega_max must be positive, got {omega_max}")
    if thermal.kbt == 0.0 and tau == 0.0:
        raise DivergentIntegralError(
            "C(0) at kbt = 0 grows logarithmically with the frequency cutoff; "
            "evaluate at tau != 0 or use the frequency-domain variance forms"
        )
    f = _correlation_envelope(kernel, thermal)
    tau = abs(float(tau))
    if tau == 0.0:
        value, _ = quad(f, 0.0, omega_max, limit=400, epsabs=1e-12, epsrel=1e-10)
    else:
        value, _ = quad(
            f, 0.0, omega_max, weight="cos", wvar=tau, limit=400, epsabs=1e-12, epsrel=1e-10
        )
    return value


def noise_correlation_cutoff_pair(
    kernel: KernelParams,
    thermal: ThermalState,
    tau: float,
    omega_max: float | None = None,
) -> tuple[float, float]:
    """C(tau) at the given cutoff and at twice the cutoff.

    The pair quantifies cutoff sensitivity; downstream users treat the two
    values agreeing as evidence the conditionally convergent tail is spent.
    """
    if omega_max is None:
        omega_max = default_correlation_cutoff(kernel)
    return (
        noise_correlation(kernel, thermal, tau, omega_max),
        noise_correlation(kernel, thermal, tau, 2.0 * omega_max),
    )


def classical_correlation(kernel: KernelParams, thermal: ThermalState, tau) -> float:
    """High-temperature limit kbt * gamma(tau) of the noise autocorrelation."""
    return thermal.kbt * memory_kernel(kernel, tau)

