"""Statistical variances of the quantum-mechanical mean position and velocity.

Two independent evaluation routes are provided:

* a frequency-domain oracle: the inner time integrals of the double-time
  variance expressions are done in closed form (the relaxation functions are
  damped sinusoids), leaving a single absolutely convergent frequency
  quadrature of ``S(w) |G(w,t)|^2`` type.  This is the primary path and also
  yields the exact time derivatives needed by the transport coefficients.
* a closed-form trigonometric integrand assembled from explicit resonance
  coefficients.  It is a validated fast path: two of its published pieces have
  transcription variants, which are resolved by comparison against the oracle
  (see ``a2_variant`` / ``prefactor_variant``).

Both routes share one oscillation-aware Gauss-Legendre panelization so that
comparisons test the algebra, not the quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import QuadratureError
from .kernel import KernelParams, ThermalState
from .relaxation import H_analytic, h_analytic

__all__ = [
    "VariancePoint",
    "VarianceSeries",
    "VarianceCalculator",
    "variances_frequency_oracle",
    "sigma_xx_closed_form",
    "sigma_vv_closed_form",
    "sigma_xv",
    "classical_variances",
    "variance_series",
    "default_variance_cutoff",
    "position_integrand_terms",
    "velocity_integrand_terms",
    "A2_VARIANTS",
    "PREFACTOR_VARIANTS",
    "VELOCITY_FORMS",
]

A2_VARIANTS = ("symmetrized", "printed")
PREFACTOR_VARIANTS = ("amplitude_squared", "printed")
VELOCITY_FORMS = ("corrected", "printed")

_GL_NODES = 16


def default_variance_cutoff(kernel: KernelParams, thermal: ThermalState) -> float:
    """Default frequency cutoff for the variance quadratures."""
    return 200.0 * max(1.0 / kernel.tau_c, kernel.gamma0, thermal.kbt / thermal.hbar)


@dataclass(frozen=True)
class VariancePoint:
    """Variances and their exact time derivatives at a single time."""

    t: float
    sxx: float
    svv: float
    sxv: float
    dsxx_dt: float
    dsvv_dt: float
    dsxv_dt: float


@dataclass
class VarianceSeries:
    """Variances on an ascending time grid, with derivative channels.

    Construction validates the physical invariants: zero initial values
    (when the grid starts at 0), nonnegative diagonal entries and a positive
    semidefinite covariance at every grid point.
    """

    t_grid: np.ndarray
    sxx: np.ndarray
    svv: np.ndarray
    sxv: np.ndarray
    dsxx_dt: np.ndarray
    dsvv_dt: np.ndarray
    dsxv_dt: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("t_grid must be strictly ascending")
        scale = np.maximum(self.sxx * self.svv, 1e-300)
        gram = self.sxx * self.svv - self.sxv**2
        if np.any(gram < -1e-9 * scale):
            worst = float(np.min(gram / scale))
            raise ValueError(f"covariance not positive semidefinite: min normalized det {worst:.3e}")
        if np.any(self.sxx < -1e-12) or np.any(self.svv < -1e-12):
            raise ValueError("negative variance encountered")
        if t[0] == 0.0:
            for name in ("sxx", "svv", "sxv"):
                v0 = float(getattr(self, name)[0])
                if abs(v0) > 1e-12:
                    raise ValueError(f"{name}(0) = {v0:.3e}, expected 0")


def _gauss_panels(edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights over the given panel edges."""
    x, w = np.polynomial.legendre.leggauss(_GL_NODES)
    left = edges[:-1]
    width = np.diff(edges)
    nodes = left[:, None] + (x[None, :] + 1.0) * 0.5 * width[:, None]
    weights = 0.5 * width[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def _panel_edges(omega_max: float, h: float, zero_scale: float | None) -> np.ndarray:
    n = max(1, int(math.ceil(omega_max / h)))
    edges = np.linspace(0.0, omega_max, n + 1)
    first = edges[1]
    if zero_scale is not None and zero_scale < first:
        m = int(math.ceil(math.log2(first / zero_scale)))
        m = min(max(m, 1), 40)
        sub = first * 2.0 ** (-np.arange(m, 0, -1, dtype=float))
        edges = np.concatenate([[0.0], sub, edges[1:]])
    return edges


def _fsum_panels(values: np.ndarray) -> float:
    """Order-independent reduction: exact sum over per-panel partial sums."""
    per_panel = values.reshape(-1, _GL_NODES).sum(axis=1)
    return math.fsum(per_panel.tolist())


class _SpectralGrid:
    """Frequency nodes plus every omega-dependent factor both routes reuse."""

    def __init__(self, kernel: KernelParams, thermal: ThermalState, omega_max: float, t_max: float):
        self.omega_max = omega_max
        self.t_max = t_max
        tau_c = kernel.tau_c
        h = min(2.0 * math.pi / max(t_max, 1e-2), 0.5 / tau_c)
        zero_scale = None
        if thermal.kbt > 0.0:
            th_scale = 2.0 * thermal.kbt / thermal.hbar
            if th_scale < h:
                zero_scale = 0.25 * th_scale
        edges = _panel_edges(omega_max, h, zero_scale)
        self.omega, self.weights = _gauss_panels(edges)

        w = self.omega
        occ = thermal.occupation(w)
        # occupation-weighted spectrum: (gamma0/pi) * occ / (1 + w^2 tau_c^2)
        self.s_env = (kernel.gamma0 / np.pi) * occ / (1.0 + (w * tau_c) ** 2)
        lam = kernel.lam
        mu_p = 1j * (w + lam) - 0.5 / tau_c
        mu_m = 1j * (w - lam) - 0.5 / tau_c
        self.inv_mu_p = 1.0 / mu_p
        self.inv_mu_m = 1.0 / mu_m


class VarianceCalculator:
    """Evaluator for the variances of a given kernel/temperature pair.

    The calculator owns the shared frequency grid; it is rebuilt automatically
    when a request exceeds the current trusted time horizon.  Set ``check=True``
    to evaluate every point on a twice-refined grid as well and fail loudly if
    the two disagree.
    """

    def __init__(
        self,
        kernel: KernelParams,
        thermal: ThermalState,
        omega_max: float | None = None,
        t_max: float | None = None,
        check: bool = False,
        rtol: float = 1e-7,
    ):
        self.kernel = kernel
        self.thermal = thermal
        self.omega_max = float(omega_max) if omega_max is not None else default_variance_cutoff(kernel, thermal)
        if self.omega_max <= 0.0:
            raise ValueError("omega_max must be positive")
        self.check = check
        self.rtol = rtol
        self._grid: _SpectralGrid | None = None
        self._fine: _SpectralGrid | None = None
        if t_max is not None:
            self._ensure_grid(float(t_max))

    # -- grid management ---------------------------------------------------

    def _ensure_grid(self, t_req: float):
        if self._grid is None or t_req > self._grid.t_max:
            t_max = max(t_req, 1.0)
            self._grid = _SpectralGrid(self.kernel, self.thermal, self.omega_max, t_max)
            self._fine = None
            if self.check:
                self._fine = _SpectralGrid(self.kernel, self.thermal, self.omega_max, 2.0 * t_max)

    # -- oracle route --------------------------------------------------------

    def _amplitudes(self, grid: _SpectralGrid, t: float):
        """Complex inner time integrals G_H, G_h and exp(i w t) on the grid."""
        k = self.kernel
        w = grid.omega
        s = np.sin(0.5 * w * t)
        c = np.cos(0.5 * w * t)
        phase_half = c + 1j * s
        eiwt = phase_half * phase_half
        # int_0^t e^{iws} ds, written to stay accurate as w t -> 0
        e0 = 2.0 * s * phase_half / w

        cos_wt = 1.0 - 2.0 * s * s
        sin_wt = 2.0 * s * c
        cl = math.cos(k.lam * t)
        sl = math.sin(k.lam * t)
        cos_p = cos_wt * cl - sin_wt * sl
        sin_p = sin_wt * cl + cos_wt * sl
        cos_m = cos_wt * cl + sin_wt * sl
        sin_m = sin_wt * cl - cos_wt * sl
        decay = math.exp(-0.5 * t / k.tau_c)
        e_p = (decay * (cos_p + 1j * sin_p) - 1.0) * grid.inv_mu_p
        e_m = (decay * (cos_m + 1j * sin_m) - 1.0) * grid.inv_mu_m

        amp = k.amplitude
        eia = complex(math.cos(k.phase), math.sin(k.phase))
        g_big = (e0 + 0.5j * amp * (eia * e_p - np.conj(eia) * e_m)) / k.gamma0
        c_plus = complex(0.5 * k.lam, 0.25 / k.tau_c)
        g_small = -(amp / k.gamma0) * (c_plus * eia * e_p + np.conj(c_plus) * np.conj(eia) * e_m)
        return eiwt, g_big, g_small

    def _point_on_grid(self, grid: _SpectralGrid, t: float) -> VariancePoint:
        if t == 0.0:
            return VariancePoint(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        eiwt, g_big, g_small = self._amplitudes(grid, t)
        s_env, wts = grid.s_env, grid.weights
        big_h = H_analytic(self.kernel, t)
        small_h = h_analytic(self.kernel, t)

        sw = s_env * wts
        sxx = _fsum_panels(sw * (g_big.real**2 + g_big.imag**2))
        svv = _fsum_panels(sw * (g_small.real**2 + g_small.imag**2))
        cross = g_big * np.conj(g_small)
        sxv = _fsum_panels(sw * cross.real)
        resp_big = (eiwt * np.conj(g_big)).real
        resp_small = (eiwt * np.conj(g_small)).real
        dsxx = _fsum_panels(sw * (2.0 * big_h) * resp_big)
        dsvv = _fsum_panels(sw * (2.0 * small_h) * resp_small)
        back = (g_big * np.conj(eiwt)).real
        dsxv = _fsum_panels(sw * (big_h * resp_small + small_h * back))
        return VariancePoint(t, sxx, svv, sxv, dsxx, dsvv, dsxv)

    def point(self, t: float) -> VariancePoint:
        """Oracle variances and derivatives at time t >= 0."""
        t = float(t)
        if t < 0.0:
            raise ValueError("t must be nonnegative")
        self._ensure_grid(t)
        result = self._point_on_grid(self._grid, t)
        if self.check:
            ref = self._point_on_grid(self._fine, t)
            for name in ("sxx", "svv", "sxv"):
                a, b = getattr(result, name), getattr(ref, name)
                scale = max(abs(a), abs(b), 1e-12)
                if abs(a - b) > self.rtol * scale:
                    raise QuadratureError(
                        f"{name}({t:g}) changed by {abs(a - b) / scale:.2e} under grid refinement",
                        error_estimate=abs(a - b) / scale,
                    )
        return result

    def series(self, t_grid) -> VarianceSeries:
        """Oracle variances on an ascending time grid."""
        t_grid = np.asarray(t_grid, dtype=float)
        if t_grid.ndim != 1 or t_grid.size == 0:
            raise ValueError("t_grid must be a nonempty 1-D array")
        self._ensure_grid(float(t_grid[-1]))
        pts = [self.point(t) for t in t_grid]
        cols = {
            name: np.array([getattr(p, name) for p in pts])
            for name in ("sxx", "svv", "sxv", "dsxx_dt", "dsvv_dt", "dsxv_dt")
        }
        return VarianceSeries(t_grid=t_grid, **cols)

    # -- closed-form route ---------------------------------------------------

    def sigma_xx_closed_form(
        self,
        t: float,
        a2_variant: str = "symmetrized",
        prefactor_variant: str = "amplitude_squared",
    ) -> float:
        """Position variance from the explicit trigonometric integrand."""
        t = float(t)
        if t < 0.0:
            raise ValueError("t must be nonnegative")
        if t == 0.0:
            return 0.0
        self._ensure_grid(t)
        grid = self._grid
        terms = position_integrand_terms(self.kernel, grid.omega, t, a2_variant, prefactor_variant)
        weight = (2.0 / self.kernel.gamma0) * grid.s_env * grid.weights
        return _fsum_panels(weight * terms.sum(axis=0))

    def sigma_vv_closed_form(
        self, t: float, a2_variant: str = "symmetrized", form: str = "corrected"
    ) -> float:
        """Velocity variance from the explicit trigonometric integrand."""
        t = float(t)
        if t < 0.0:
            raise ValueError("t must be nonnegative")
        if t == 0.0:
            return 0.0
        self._ensure_grid(t)
        grid = self._grid
        terms = velocity_integrand_terms(self.kernel, grid.omega, t, a2_variant, form)
        weight = (2.0 / self.kernel.lam**2) * grid.s_env * grid.weights
        return _fsum_panels(weight * terms.sum(axis=0))


# -- resonance coefficients and explicit integrand terms ----------------------


@dataclass(frozen=True)
class ResonanceCoefficients:
    """Lorentzian weights at the sum/difference resonances of the kernel."""

    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray
    a4: np.ndarray
    a5: np.ndarray
    a6: np.ndarray


def resonance_coefficients(
    kernel: KernelParams, omega, a2_variant: str = "symmetrized"
) -> ResonanceCoefficients:
    """Coefficient set entering the closed-form variance integrands.

    ``a2_variant`` selects between the symmetrized combination ``a5 + a6``
    and the printed one whose second numerator repeats the difference
    frequency; see the package notes on typo resolution.
    """
    if a2_variant not in A2_VARIANTS:
        raise ValueError(f"a2_variant must be one of {A2_VARIANTS}")
    w = np.asarray(omega, dtype=float)
    tc, lam = kernel.tau_c, kernel.lam
    dm = lam - w
    dp = lam + w
    den_m = 1.0 + 4.0 * tc * tc * dm * dm
    den_p = 1.0 + 4.0 * tc * tc * dp * dp
    a3 = tc / den_m
    a4 = tc / den_p
    a5 = 2.0 * tc * tc * dm / den_m
    a6 = 2.0 * tc * tc * dp / den_p
    a1 = a3 + a4
    if a2_variant == "symmetrized":
        a2 = a5 + a6
    else:
        a2 = a5 + 2.0 * tc * tc * dm / den_p
    return ResonanceCoefficients(a1, a2, a3, a4, a5, a6)


class _TrigTable:
    """All sine/cosine combinations the explicit terms draw from."""

    def __init__(self, kernel: KernelParams, omega: np.ndarray, t: float):
        k = kernel
        self.tc, self.lam, self.g0, self.amp = k.tau_c, k.lam, k.gamma0, k.amplitude
        self.alpha = k.phase
        self.t = t
        self.w = omega
        self.dm = self.lam - omega
        self.dp = self.lam + omega

        self.e1 = math.exp(-0.5 * t / self.tc)
        self.e2 = self.e1 * self.e1
        theta = self.lam * t + self.alpha
        self.s_th, self.c_th = math.sin(theta), math.cos(theta)
        self.s_2th, self.c_2th = math.sin(2.0 * theta), math.cos(2.0 * theta)
        self.sa, self.ca = math.sin(self.alpha), math.cos(self.alpha)
        self.s2a, self.c2a = math.sin(2.0 * self.alpha), math.cos(2.0 * self.alpha)

        self.swt = np.sin(omega * t)
        self.cwt = np.cos(omega * t)
        cl, sl = math.cos(self.lam * t), math.sin(self.lam * t)
        self.sdm = sl * self.cwt - cl * self.swt
        self.cdm = cl * self.cwt + sl * self.swt
        self.sdp = sl * self.cwt + cl * self.swt
        self.cdp = cl * self.cwt - sl * self.swt

    def shifted(self, mult: float, s_base, c_base):
        """sin/cos of (mult*alpha + base angle), vectorized over the grid."""
        sm = math.sin(mult * self.alpha)
        cm = math.cos(mult * self.alpha)
        return sm * c_base + cm * s_base, cm * c_base - sm * s_base


def position_integrand_terms(
    kernel: KernelParams,
    omega,
    t: float,
    a2_variant: str = "symmetrized",
    prefactor_variant: str = "amplitude_squared",
) -> np.ndarray:
    """The eleven explicit pieces of the position-variance integrand, stacked.

    ``prefactor_variant`` selects the coefficient of the final cross term:
    the amplitude-squared form expected by symmetry with its partner term, or
    the literal printed reading (a cubed resonance coefficient).
    """
    if prefactor_variant not in PREFACTOR_VARIANTS:
        raise ValueError(f"prefactor_variant must be one of {PREFACTOR_VARIANTS}")
    w = np.asarray(omega, dtype=float)
    tt = _TrigTable(kernel, w, float(t))
    rc = resonance_coefficients(kernel, w, a2_variant)
    tc, lam, g0, amp = tt.tc, tt.lam, tt.g0, tt.amp
    e1, e2 = tt.e1, tt.e2
    sa, ca, s2a, c2a = tt.sa, tt.ca, tt.s2a, tt.c2a
    s_th, c_th, s_2th, c_2th = tt.s_th, tt.c_th, tt.s_2th, tt.c_2th
    sdm, cdm, sdp, cdp = tt.sdm, tt.cdm, tt.sdp, tt.cdp
    dm, dp = tt.dm, tt.dp

    sin_a_p_wt = sa * tt.cwt + ca * tt.swt
    cos_a_p_wt = ca * tt.cwt - sa * tt.swt
    sin_a_m_wt = sa * tt.cwt - ca * tt.swt
    cos_a_m_wt = ca * tt.cwt + sa * tt.swt
    sin_a_dm, cos_a_dm = tt.shifted(1.0, sdm, cdm)
    sin_a_dp, cos_a_dp = tt.shifted(1.0, sdp, cdp)
    sin_2a_dm, cos_2a_dm = tt.shifted(2.0, sdm, cdm)
    sin_2a_dp, cos_2a_dp = tt.shifted(2.0, sdp, cdp)

    f1 = (1.0 - tt.cwt) / (g0 * w * w)

    f2 = (amp / (g0 * w)) * (
        rc.a3 * (cos_a_p_wt - ca)
        - rc.a4 * (cos_a_m_wt - ca)
        - rc.a5 * (sin_a_p_wt - sa)
        + rc.a6 * (sin_a_m_wt - sa)
    )

    f3 = -(amp * rc.a1 / (2.0 * g0 * g0)) * (
        e1 * (s_th + 2.0 * lam * tc * c_th) - (sa + 2.0 * lam * tc * ca)
    )

    f4 = -(amp * rc.a2 / (2.0 * g0 * g0)) * (
        e1 * (c_th - 2.0 * lam * tc * s_th) - (ca - 2.0 * lam * tc * sa)
    )

    f5 = (amp * amp * rc.a2 / (8.0 * g0 * g0)) * (
        e2 * (s_2th + 2.0 * lam * tc * c_2th) - (s2a + 2.0 * lam * tc * c2a)
    )

    quarter = 1.0 / (4.0 * g0 * tc)
    f6 = (amp * amp * tc / (2.0 * g0)) * rc.a1 * (
        e2
        + e2 * quarter * (2.0 * lam * tc * s_2th - c_2th)
        - (1.0 + quarter * (2.0 * lam * tc * s2a - c2a))
    )

    f7 = -(amp / (g0 * w)) * (
        rc.a3 * (e1 * (2.0 * tc * dm * sin_a_dm - cos_a_dm) - 2.0 * tc * dm * sa + ca)
        - rc.a4 * (e1 * (2.0 * tc * dp * sin_a_dp - cos_a_dp) - 2.0 * tc * dp * sa + ca)
    )

    f8 = (amp * amp * rc.a3 / g0) * (
        rc.a3 * (e1 * (2.0 * tc * dm * sdm - cdm) + 1.0)
        - rc.a4 * (e1 * (2.0 * tc * dp * sin_2a_dp - cos_2a_dp) - (2.0 * tc * dp * s2a - c2a))
    )

    f9 = (amp * amp * rc.a4 / g0) * (
        rc.a4 * (e1 * (2.0 * tc * dp * sdp - cdp) + 1.0)
        - rc.a3 * (e1 * (2.0 * tc * dm * sin_2a_dm - cos_2a_dm) - (2.0 * tc * dm * s2a - c2a))
    )

    f10 = -(amp * amp * rc.a5 / g0) * (
        rc.a4 * (e1 * (sin_2a_dp + 2.0 * tc * dp * cos_2a_dp) - (s2a + 2.0 * tc * dp * c2a))
        + rc.a3 * (e1 * (sdm + 2.0 * tc * dm * cdm) - 2.0 * tc * dm)
    )

    if prefactor_variant == "amplitude_squared":
        pref11 = amp * amp * rc.a6
    else:
        pref11 = rc.a6 * rc.a6 * rc.a6
    f11 = -(pref11 / g0) * (
        rc.a3 * (e1 * (sin_2a_dm + 2.0 * tc * dm * cos_2a_dm) - (s2a + 2.0 * tc * dm * c2a))
        + rc.a4 * (e1 * (sdp + 2.0 * tc * dp * cdp) - 2.0 * tc * dp)
    )

    return np.stack([f1, f2, f3, f4, f5, f6, f7, f8, f9, f10, f11])


def velocity_integrand_terms(
    kernel: KernelParams,
    omega,
    t: float,
    a2_variant: str = "symmetrized",
    form: str = "corrected",
) -> np.ndarray:
    """Explicit pieces of the velocity-variance integrand, stacked.

    ``form="printed"`` reproduces the published seven-term expression
    verbatim (given ``a2_variant``).  That expression does not agree with the
    frequency-domain oracle: its cross-resonance pieces carry transcription
    defects that no single- or two-coefficient repair fixes (checked by
    exhaustive search).  ``form="corrected"`` is the six-term regrouping
    obtained by squaring the damped-sinusoid velocity amplitude directly; it
    matches the oracle integrand to machine precision and is the default.
    """
    if form not in VELOCITY_FORMS:
        raise ValueError(f"form must be one of {VELOCITY_FORMS}")
    if form == "corrected":
        return _velocity_terms_corrected(kernel, omega, t)
    w = np.asarray(omega, dtype=float)
    tt = _TrigTable(kernel, w, float(t))
    rc = resonance_coefficients(kernel, w, a2_variant)
    tc, lam, g0 = tt.tc, tt.lam, tt.g0
    e1, e2 = tt.e1, tt.e2
    s2a, c2a = tt.s2a, tt.c2a
    s_2th, c_2th = tt.s_2th, tt.c_2th
    sdm, cdm, sdp, cdp = tt.sdm, tt.cdm, tt.sdp, tt.cdp
    dm, dp = tt.dm, tt.dp

    sin_2a_dm, cos_2a_dm = tt.shifted(2.0, sdm, cdm)
    sin_2a_dp, cos_2a_dp = tt.shifted(2.0, sdp, cdp)

    quarter = 1.0 / (4.0 * g0 * tc)
    ripple = 2.0 * lam * tc * s_2th - c_2th
    ripple0 = 2.0 * lam * tc * s2a - c2a

    fv1 = 0.25 * (rc.a1 / (2.0 * tc) + lam * rc.a2) * (
        e2 + e2 * quarter * ripple - (1.0 + quarter * ripple0)
    )

    fv2 = (lam * tc / 2.0) * (lam * rc.a1 - rc.a2 / (2.0 * tc)) * (
        e2 - e2 * quarter * ripple - (1.0 - quarter * ripple0)
    )

    fv3 = (-1.0 / (8.0 * g0)) * (lam * rc.a1 / tc + lam * lam * rc.a2 - rc.a2 / (4.0 * tc * tc)) * (
        e2 * (s_2th + 2.0 * lam * tc * c_2th) - (s2a + 2.0 * lam * tc * c2a)
    )

    fv4 = (rc.a3 / (2.0 * tc) + lam * rc.a5) * (
        (rc.a3 / (2.0 * tc)) * (e1 * (2.0 * tc * dm * sdm - cdm) + 1.0)
        + lam * rc.a3 * (
            e1 * (sin_2a_dm + 2.0 * tc * dm * cos_2a_dm)
            - e1 * (sdm + 2.0 * tc * dm * cdm)
            - (s2a + 2.0 * tc * dm * c2a)
            + 2.0 * tc * dm
        )
        - (rc.a4 / (2.0 * tc)) * (
            e1 * (2.0 * tc * dp * sin_2a_dp - cos_2a_dp) - (2.0 * tc * dp * s2a - c2a)
        )
    )

    fv5 = (rc.a4 / (2.0 * tc) + lam * rc.a6) * (
        (rc.a4 / (2.0 * tc)) * (e1 * (2.0 * tc * dp * sdp - cdp) + 1.0)
        - (rc.a3 / (2.0 * tc)) * (
            e1 * (2.0 * tc * dm * sin_2a_dm - cos_2a_dm) - (2.0 * tc * dm * s2a - c2a)
        )
        + lam * rc.a3 * (e1 * (sin_2a_dm + 2.0 * tc * dm * cos_2a_dm) - (s2a + 2.0 * tc * dm * c2a))
        - lam * rc.a4 * (e1 * (sdp + 2.0 * tc * dp * cdp) - 2.0 * tc * dp)
    )

    fv6 = (lam * rc.a3 - rc.a5 / (2.0 * tc)) * (
        (rc.a3 / (2.0 * tc)) * (e1 * (sdm + 2.0 * tc * dm * cdm) - 2.0 * tc * dm)
        + (rc.a4 / (2.0 * tc)) * (
            e1 * (sin_2a_dp + 2.0 * tc * dp * cos_2a_dp) - (s2a + 2.0 * tc * dp * c2a)
        )
        + lam * rc.a4 * (e1 * (2.0 * tc * dp * sin_2a_dp - cos_2a_dp) - (2.0 * tc * dp * s2a - c2a))
        + lam * rc.a3 * (e1 * (2.0 * tc * dm * sdm - cdm) + 1.0)
    )

    fv7 = (lam * rc.a4 - rc.a6 / (2.0 * tc)) * (
        (rc.a3 / tc) * (e1 * (sin_2a_dm + 2.0 * tc * dm * cos_2a_dm) - (s2a + 2.0 * tc * dm * c2a))
        + (rc.a4 / tc) * (e1 * (sdp + 2.0 * tc * dp * cdp) - 2.0 * tc * dp)
        + lam * rc.a3 * (e1 * (2.0 * tc * dm * sin_2a_dm - cos_2a_dm) - (2.0 * tc * dm * s2a - c2a))
        + lam * rc.a4 * (e1 * (2.0 * tc * dp * sdp - cdp) + 1.0)
    )

    return np.stack([fv1, fv2, fv3, fv4, fv5, fv6, fv7])


def _velocity_terms_corrected(kernel: KernelParams, omega, t: float) -> np.ndarray:
    """Six-term velocity integrand from squaring the velocity amplitude.

    The velocity memory is a sum of two complex-conjugate decaying phases with
    coefficient c = lam/2 + i/(4 tau_c); its squared inner time integral
    splits into two diagonal resonance terms and one cross term with complex
    weight W built from the same resonance coefficients.
    """
    w = np.asarray(omega, dtype=float)
    t = float(t)
    tc, lam = kernel.tau_c, kernel.lam
    alpha = kernel.phase
    dm = lam - w
    dp = lam + w
    den_m = 1.0 + 4.0 * tc * tc * dm * dm
    den_p = 1.0 + 4.0 * tc * tc * dp * dp
    a3 = tc / den_m
    a4 = tc / den_p

    e1 = math.exp(-0.5 * t / tc)
    e2 = e1 * e1
    cwt = np.cos(w * t)
    swt = np.sin(w * t)
    cl, sl = math.cos(lam * t), math.sin(lam * t)
    cdm = cl * cwt + sl * swt
    sdm = sl * cwt - cl * swt
    cdp = cl * cwt - sl * swt
    sdp = sl * cwt + cl * swt

    diag = 0.5 * lam * lam * tc + 0.125 / tc
    t_sum = diag * a4 * (1.0 + e2 - 2.0 * e1 * cdp)
    t_diff = diag * a3 * (1.0 + e2 - 2.0 * e1 * cdm)

    c_sq = complex(0.25 * lam * lam - 0.0625 / (tc * tc), 0.25 * lam / tc)
    phase2a = complex(math.cos(2.0 * alpha), math.sin(2.0 * alpha))
    cross_w = (16.0 * tc * tc) * c_sq * phase2a * (
        (0.25 / (tc * tc) - dp * dm) + 1j * (lam / tc)
    ) * a3 * a4
    wr, wi = cross_w.real, cross_w.imag

    c2l, s2l = math.cos(2.0 * lam * t), math.sin(2.0 * lam * t)
    cross_decay = e2 * (wr * c2l - wi * s2l)
    cross_sum = -e1 * (wr * cdp - wi * sdp)
    cross_diff = -e1 * (wr * cdm - wi * sdm)
    return np.stack([t_sum, t_diff, cross_decay, cross_sum, cross_diff, wr])


# -- module-level convenience wrappers ----------------------------------------


def variances_frequency_oracle(
    kernel: KernelParams, thermal: ThermalState, t: float, omega_max: float | None = None
) -> tuple[float, float, float]:
    """(sxx, svv, sxv) at time t from the frequency-domain oracle."""
    calc = VarianceCalculator(kernel, thermal, omega_max=omega_max, t_max=max(float(t), 1.0))
    p = calc.point(t)
    return p.sxx, p.svv, p.sxv


def sigma_xv(
    kernel: KernelParams, thermal: ThermalState, t: float, omega_max: float | None = None
) -> float:
    """Position-velocity covariance; equals half the slope of the position variance."""
    return variances_frequency_oracle(kernel, thermal, t, omega_max)[2]


def sigma_xx_closed_form(
    kernel: KernelParams,
    thermal: ThermalState,
    t: float,
    omega_max: float | None = None,
    a2_variant: str = "symmetrized",
    prefactor_variant: str = "amplitude_squared",
) -> float:
    calc = VarianceCalculator(kernel, thermal, omega_max=omega_max, t_max=max(float(t), 1.0))
    return calc.sigma_xx_closed_form(t, a2_variant, prefactor_variant)


def sigma_vv_closed_form(
    kernel: KernelParams,
    thermal: ThermalState,
    t: float,
    omega_max: float | None = None,
    a2_variant: str = "symmetrized",
    form: str = "corrected",
) -> float:
    calc = VarianceCalculator(kernel, thermal, omega_max=omega_max, t_max=max(float(t), 1.0))
    return calc.sigma_vv_closed_form(t, a2_variant, form)


def classical_variances(
    kernel: KernelParams, thermal: ThermalState, t: float
) -> tuple[float, float, float]:
    """High-temperature variances built from the relaxation functions alone."""
    t = float(t)
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    kbt = thermal.kbt
    if t == 0.0:
        return 0.0, 0.0, 0.0
    big_h = H_analytic(kernel, t)
    small_h = h_analytic(kernel, t)
    cum_h, _ = quad(lambda s: H_analytic(kernel, s), 0.0, t, limit=200, epsabs=1e-13, epsrel=1e-11)
    sxx = kbt * (2.0 * cum_h - big_h * big_h)
    svv = kbt * (1.0 - small_h * small_h)
    sxv = kbt * big_h * (1.0 - small_h)
    return sxx, svv, sxv


def variance_series(
    kernel: KernelParams,
    thermal: ThermalState,
    t_grid,
    omega_max: float | None = None,
    check: bool = False,
) -> VarianceSeries:
    """Oracle variances over a time grid with a shared frequency panelization."""
    t_grid = np.asarray(t_grid, dtype=float)
    calc = VarianceCalculator(
        kernel, thermal, omega_max=omega_max, t_max=float(t_grid[-1]), check=check
    )
    return calc.series(t_grid)
