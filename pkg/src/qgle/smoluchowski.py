"""Overdamped quantum dynamics in an external potential.

Provides the polynomial potential container, the second-order quantum
correction hierarchy for the system degree of freedom, the overdamped quantum
diffusion coefficient, a mass-conserving positivity-aware drift-diffusion
solver for the configuration-space density, and an independent overdamped
Langevin sampler used to cross-check the solver's stationary state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import SolverStabilityError
from .kernel import KernelParams, ThermalState

__all__ = [
    "PotentialSpec",
    "CorrectionState",
    "CorrectionSeries",
    "DensityField",
    "evolve_corrections",
    "quantum_dispersion_force",
    "effective_potential",
    "effective_force",
    "linearized_frequency",
    "overdamped_diffusion",
    "stationary_density",
    "solve_smoluchowski",
    "overdamped_langevin_check",
    "OverdampedEnsemble",
    "ks_distance",
]


@dataclass(frozen=True)
class PotentialSpec:
    """Polynomial external potential with derivative evaluators.

    Coefficients are ascending (constant first); degree at most 6.
    """

    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) == 0:
            raise ValueError("at least one coefficient required")
        if len(coeffs) - 1 > 6:
            raise ValueError(f"degree {len(coeffs) - 1} unsupported (max 6)")

    @classmethod
    def free(cls) -> "PotentialSpec":
        return cls((0.0,))

    @classmethod
    def harmonic(cls, omega_tilde: float) -> "PotentialSpec":
        return cls((0.0, 0.0, 0.5 * omega_tilde**2))

    @classmethod
    def quartic_perturbed(cls, omega_tilde: float, quartic: float) -> "PotentialSpec":
        return cls((0.0, 0.0, 0.5 * omega_tilde**2, 0.0, quartic))

    def _eval(self, x, order: int):
        c = np.polynomial.polynomial.polyder(self.coefficients, order) if order else self.coefficients
        out = np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), c)
        return out if np.ndim(out) else float(out)

    def value(self, x):
        return self._eval(x, 0)

    def d1(self, x):
        return self._eval(x, 1)

    def d2(self, x):
        return self._eval(x, 2)

    def d3(self, x):
        return self._eval(x, 3)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def is_bounded_below(self) -> bool:
        c = self.coefficients
        deg = self.degree
        while deg > 0 and c[deg] == 0.0:
            deg -= 1
        if deg == 0:
            return True
        return deg % 2 == 0 and c[deg] > 0.0


@dataclass(frozen=True)
class CorrectionState:
    """Mean phase-space point plus the second quantum cumulants.

    ``dxx`` is the position-fluctuation variance, ``dpp`` the momentum one,
    and ``dxp`` the symmetrized cross moment.  The generalized-uncertainty
    determinant dxx*dpp - dxp^2/4 is conserved exactly by the evolution.
    """

    x: float
    p: float
    dxx: float
    dxp: float
    dpp: float

    def __post_init__(self):
        if self.dxx < 0.0 or self.dpp < 0.0:
            raise ValueError("fluctuation variances must be nonnegative")

    @property
    def uncertainty_determinant(self) -> float:
        return self.dxx * self.dpp - 0.25 * self.dxp**2

    @classmethod
    def coherent(cls, omega_tilde: float, x: float = 0.0, p: float = 0.0, hbar: float = 1.0) -> "CorrectionState":
        if omega_tilde <= 0.0:
            raise ValueError("omega_tilde must be positive")
        return cls(x=x, p=p, dxx=0.5 * hbar / omega_tilde, dxp=0.0, dpp=0.5 * hbar * omega_tilde)


@dataclass
class CorrectionSeries:
    """Correction-hierarchy trajectory on a time grid."""

    t_grid: np.ndarray
    x: np.ndarray
    p: np.ndarray
    dxx: np.ndarray
    dxp: np.ndarray
    dpp: np.ndarray

    def state_at(self, index: int) -> CorrectionState:
        return CorrectionState(
            x=float(self.x[index]),
            p=float(self.p[index]),
            dxx=float(self.dxx[index]),
            dxp=float(self.dxp[index]),
            dpp=float(self.dpp[index]),
        )

    def dxx_at(self, t: float) -> float:
        return float(np.interp(t, self.t_grid, self.dxx))

    def determinant(self) -> np.ndarray:
        return self.dxx * self.dpp - 0.25 * self.dxp**2


def _correction_rhs(pot: PotentialSpec, s: np.ndarray) -> np.ndarray:
    x, p, dxx, dxp, dpp = s
    v2 = pot.d2(x)
    return np.array(
        [
            p,
            -pot.d1(x) - 0.5 * pot.d3(x) * dxx,
            dxp,
            2.0 * dpp - 2.0 * v2 * dxx,
            -v2 * dxp,
        ]
    )


def evolve_corrections(
    pot: PotentialSpec,
    init: CorrectionState,
    t_grid,
    hbar: float = 1.0,
    dt: float = 0.002,
    drift_tol: float = 1e-6,
) -> CorrectionSeries:
    """Integrate the coupled mean/second-cumulant equations with RK4.

    The generalized-uncertainty determinant is checked after integration;
    relative drift beyond ``drift_tol`` aborts with diagnostics, since the
    continuous dynamics conserves it exactly for any curvature history.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1 or np.any(np.diff(t_grid) <= 0.0):
        raise ValueError("t_grid must be ascending")
    det0 = init.uncertainty_determinant
    if det0 < 0.25 * hbar**2 - 1e-9:
        raise ValueError(
            f"initial state violates the uncertainty bound: det = {det0:.6e} < hbar^2/4"
        )

    out = np.empty((5, t_grid.size))
    s = np.array([init.x, init.p, init.dxx, init.dxp, init.dpp])
    t_now = float(t_grid[0])
    out[:, 0] = s
    for i in range(1, t_grid.size):
        span = t_grid[i] - t_now
        n_sub = max(1, int(math.ceil(span / dt)))
        sub = span / n_sub
        for _ in range(n_sub):
            k1 = _correction_rhs(pot, s)
            k2 = _correction_rhs(pot, s + 0.5 * sub * k1)
            k3 = _correction_rhs(pot, s + 0.5 * sub * k2)
            k4 = _correction_rhs(pot, s + sub * k3)
            s = s + (sub / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t_now = float(t_grid[i])
        out[:, i] = s

    series = CorrectionSeries(t_grid, *out)
    det = series.determinant()
    drift = np.max(np.abs(det - det0)) / max(abs(det0), 1e-300)
    if drift > drift_tol:
        raise SolverStabilityError(
            f"uncertainty determinant drifted by {drift:.3e} relative "
            f"(det0 = {det0:.6e}, worst = {det[np.argmax(np.abs(det - det0))]:.6e}); "
            "reduce dt",
            suggested_dt=dt / 4.0,
        )
    return series


def quantum_dispersion_force(pot: PotentialSpec, state: CorrectionState) -> float:
    """Leading quantum dispersion of the force: -V'''(x) * dxx / 2."""
    return -0.5 * pot.d3(state.x) * state.dxx


def effective_potential(pot: PotentialSpec, x, dxx: float):
    """Potential dressed by the leading quantum correction: V + V''*dxx/2."""
    out = pot.value(x) + 0.5 * pot.d2(x) * dxx
    return out if np.ndim(out) else float(out)


def effective_force(pot: PotentialSpec, x, dxx: float):
    """Gradient of the effective potential: V' + V'''*dxx/2 (= V' - Q)."""
    out = pot.d1(x) + 0.5 * pot.d3(x) * dxx
    return out if np.ndim(out) else float(out)


def linearized_frequency(pot: PotentialSpec) -> float:
    """sqrt(V'') at the global minimum of the potential.

    Used as the default oscillation frequency of the overdamped diffusion
    coefficient; callers may override with any positive frequency.
    """
    d1 = np.polynomial.polynomial.polyder(pot.coefficients, 1)
    roots = np.polynomial.polynomial.polyroots(d1) if len(d1) > 1 else np.array([0.0])
    real = [float(r.real) for r in np.atleast_1d(roots) if abs(complex(r).imag) < 1e-10]
    if not real:
        raise ValueError("potential has no stationary point to linearize about")
    x_min = min(real, key=pot.value)
    curv = pot.d2(x_min)
    if curv <= 0.0:
        raise ValueError(f"potential curvature {curv:g} at minimum is not positive")
    return math.sqrt(curv)


def overdamped_diffusion(
    kernel: KernelParams, thermal: ThermalState, omega_tilde: float
) -> float:
    """Overdamped quantum diffusion coefficient hbar*w*(2*nbar + 1)/(2*gamma0).

    Reduces to kbt/gamma0 when the mode is classical and to the vacuum value
    hbar*w/(2*gamma0) at zero temperature.
    """
    if omega_tilde <= 0.0:
        raise ValueError(f"omega_tilde must be positive, got {omega_tilde}")
    nbar = thermal.bose_occupancy(omega_tilde)
    return 0.5 * thermal.hbar * omega_tilde * (2.0 * nbar + 1.0) / kernel.gamma0


@dataclass
class DensityField:
    """Probability density on a uniform spatial grid."""

    x_grid: np.ndarray
    p_values: np.ndarray

    def __post_init__(self):
        self.x_grid = np.asarray(self.x_grid, dtype=float)
        self.p_values = np.asarray(self.p_values, dtype=float)
        dx = np.diff(self.x_grid)
        if self.x_grid.size < 8 or not np.allclose(dx, dx[0], rtol=1e-10, atol=0.0):
            raise ValueError("x_grid must be uniform with at least 8 points")
        if self.p_values.shape != self.x_grid.shape:
            raise ValueError("p_values must match x_grid")
        if np.any(self.p_values < -1e-12 * max(self.p_values.max(), 1e-300)):
            raise ValueError("density must be nonnegative")

    @property
    def dx(self) -> float:
        return float(self.x_grid[1] - self.x_grid[0])

    @property
    def mass(self) -> float:
        return float(self.p_values.sum() * self.dx)

    def mean(self) -> float:
        return float((self.x_grid * self.p_values).sum() * self.dx / self.mass)

    def variance(self) -> float:
        m = self.mean()
        return float(((self.x_grid - m) ** 2 * self.p_values).sum() * self.dx / self.mass)

    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.p_values) * self.dx
        return c / c[-1]

    @classmethod
    def gaussian(cls, x_grid, mean: float, var: float) -> "DensityField":
        x_grid = np.asarray(x_grid, dtype=float)
        p = np.exp(-0.5 * (x_grid - mean) ** 2 / var) / math.sqrt(2.0 * math.pi * var)
        field = cls(x_grid, p)
        field.p_values = field.p_values / field.mass
        return field


def stationary_density(
    pot: PotentialSpec,
    kernel: KernelParams,
    diffusion: float,
    x_grid,
    dxx: float = 0.0,
) -> DensityField:
    """Normalized stationary state exp(-V_eff / (gamma0 * D)) of the
    drift-diffusion dynamics with a time-independent effective potential."""
    x_grid = np.asarray(x_grid, dtype=float)
    v_eff = effective_potential(pot, x_grid, dxx)
    w = np.exp(-(v_eff - v_eff.min()) / (kernel.gamma0 * diffusion))
    field = DensityField(x_grid, w)
    field.p_values = field.p_values / field.mass
    return field


def _chang_cooper_operator(
    drift: np.ndarray, diffusion: float, dx: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tridiagonal flux-form generator L with no-flux boundaries.

    ``drift`` holds the velocity a = -V_eff'/gamma0 at the n-1 interior cell
    interfaces.  The interface weighting makes the discrete stationary state
    match exp(-V_eff/(gamma0 D)) and keeps the operator an M-matrix.
    """
    w = drift * dx / diffusion
    # interface weighting delta(w) = 1/(1 - e^{-w}) - 1/w makes the zero-flux
    # ratio p[i+1]/p[i] equal e^w exactly (Gibbs form on the grid)
    delta = np.empty_like(w)
    small = np.abs(w) < 1e-4
    ws = w[small]
    delta[small] = 0.5 + ws / 12.0 - ws**3 / 720.0
    wl = w[~small]
    delta[~small] = -1.0 / np.expm1(-wl) - 1.0 / wl

    # flux at interface i+1/2: J = a*((1-delta)*p[i+1] + delta*p[i]) - D*(p[i+1]-p[i])/dx
    up = drift * (1.0 - delta) - diffusion / dx   # multiplies p[i+1]
    lo = drift * delta + diffusion / dx           # multiplies p[i]
    n = drift.size + 1
    diag = np.zeros(n)
    lower = np.zeros(n - 1)
    upper = np.zeros(n - 1)
    # dp_i/dt = -(J_{i+1/2} - J_{i-1/2})/dx, boundary fluxes zero
    diag[:-1] -= lo / dx
    upper[:] = -up / dx
    diag[1:] += up / dx
    lower[:] = lo / dx
    return lower, diag, upper


@dataclass
class SmoluchowskiResult:
    """Density snapshots of a drift-diffusion run."""

    times: np.ndarray
    fields: list

    @property
    def final(self) -> DensityField:
        return self.fields[-1]


def solve_smoluchowski(
    pot: PotentialSpec,
    kernel: KernelParams,
    thermal: ThermalState,
    omega_tilde: float,
    init: DensityField,
    t_final: float,
    dt: float | None = None,
    dxx: float | None = None,
    dxx_of_t=None,
    store_times=None,
) -> SmoluchowskiResult:
    """Crank-Nicolson stepping of the overdamped configuration-space equation
    with drift from the quantum-corrected potential and constant diffusion.

    The spatial operator is flux-conservative with interface weighting, so
    mass is conserved to solver roundoff and the discrete stationary state is
    the Gibbs form of the effective potential.  ``dxx`` (default: the
    stationary coherent width hbar/2*omega_tilde) or ``dxx_of_t`` supplies
    the quantum correction entering the drift; for quadratic potentials it
    has no effect on the dynamics.

    Raises
    ------
    SolverStabilityError
        On positivity loss or mass drift beyond 1e-9, with a suggested dt.
    """
    if not pot.is_bounded_below():
        raise ValueError("potential must be bounded below on the solver domain")
    d_qo = overdamped_diffusion(kernel, thermal, omega_tilde)
    if dxx is None:
        dxx = 0.5 * thermal.hbar / omega_tilde
    x = init.x_grid
    dx = init.dx
    mass0 = init.mass
    if abs(mass0 - 1.0) > 1e-9:
        raise ValueError(f"initial density mass {mass0:.12f} is not 1")
    if init.p_values[0] > 1e-12 or init.p_values[-1] > 1e-12:
        raise ValueError("domain too small: boundary density above 1e-12")

    interfaces = 0.5 * (x[:-1] + x[1:])

    def build(t_now: float):
        dxx_now = dxx_of_t(t_now) if dxx_of_t is not None else dxx
        a = -effective_force(pot, interfaces, dxx_now) / kernel.gamma0
        return _chang_cooper_operator(a, d_qo, dx)

    if dt is None:
        a_max = float(np.max(np.abs(effective_force(pot, x, dxx)))) / kernel.gamma0
        dt = min(dx * dx / d_qo, dx / max(a_max, 1e-12))
    n_steps = max(1, int(math.ceil(t_final / dt)))
    dt = t_final / n_steps

    store_times = np.asarray(store_times if store_times is not None else [t_final], dtype=float)
    store_idx = set(int(round(ts / dt)) for ts in store_times)

    p = init.p_values.copy()
    n = p.size
    lower, diag, upper = build(0.0)
    time_dependent = dxx_of_t is not None

    ab = np.zeros((3, n))

    def half_matrices(lower, diag, upper):
        # banded (I - dt/2 L) for solve_banded, and bands of (I + dt/2 L)
        ab[0, 1:] = -0.5 * dt * upper
        ab[1, :] = 1.0 - 0.5 * dt * diag
        ab[2, :-1] = -0.5 * dt * lower
        return ab

    fields = [DensityField(x, p.copy())]
    times = [0.0]
    for step in range(1, n_steps + 1):
        if time_dependent:
            lower, diag, upper = build((step - 0.5) * dt)
        rhs = p + 0.5 * dt * (
            diag * p
            + np.concatenate([[0.0], lower * p[:-1]])
            + np.concatenate([upper * p[1:], [0.0]])
        )
        p_new = solve_banded((1, 1), half_matrices(lower, diag, upper), rhs)
        # roundoff-scale undershoot is clipped; anything larger is a scheme
        # failure and is surfaced with a suggested step size
        if p_new.min() < -1e-9 * max(p_new.max(), 1e-300):
            raise SolverStabilityError(
                f"positivity violated at step {step} (min {p_new.min():.3e})",
                suggested_dt=dt / 2.0,
            )
        np.clip(p_new, 0.0, None, out=p_new)
        p = p_new
        mass = p.sum() * dx
        if abs(mass - mass0) > 1e-9:
            raise SolverStabilityError(
                f"mass drifted to {mass:.12f} at step {step}", suggested_dt=dt / 2.0
            )
        if step in store_idx:
            fields.append(DensityField(x, p.copy()))
            times.append(step * dt)
    return SmoluchowskiResult(np.asarray(times), fields)


@dataclass
class OverdampedEnsemble:
    """Final positions of independent overdamped Langevin trajectories."""

    positions: np.ndarray
    t_final: float
    dt: float
    seed: int

    def variance(self) -> float:
        return float(np.var(self.positions))


def overdamped_langevin_check(
    pot: PotentialSpec,
    kernel: KernelParams,
    thermal: ThermalState,
    omega_tilde: float,
    n_traj: int,
    seed: int,
    t_final: float | None = None,
    dt: float = 0.005,
    dxx: float | None = None,
    x0: float = 0.0,
) -> OverdampedEnsemble:
    """Euler-Maruyama ensemble of the overdamped dynamics with white-noise
    intensity matched to the overdamped diffusion coefficient.

    The stationary histogram is the cross-check target for the drift-
    diffusion solver.
    """
    d_qo = overdamped_diffusion(kernel, thermal, omega_tilde)
    if dxx is None:
        dxx = 0.5 * thermal.hbar / omega_tilde
    if t_final is None:
        t_final = 12.0 * kernel.gamma0 / omega_tilde**2
    n_steps = int(math.ceil(t_final / dt))
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 0], dtype=np.uint64)))
    x = np.full(n_traj, float(x0))
    amp = math.sqrt(2.0 * d_qo * dt)
    for _ in range(n_steps):
        drift = -effective_force(pot, x, dxx) / kernel.gamma0
        x = x + dt * drift + amp * rng.standard_normal(n_traj)
    return OverdampedEnsemble(positions=x, t_final=n_steps * dt, dt=dt, seed=seed)


def ks_distance(samples: np.ndarray, density: DensityField) -> float:
    """Kolmogorov-Smirnov distance between an empirical sample and a gridded
    density's distribution function."""
    samples = np.sort(np.asarray(samples, dtype=float))
    cdf_grid = density.cdf()
    target = np.interp(samples, density.x_grid, cdf_grid, left=0.0, right=1.0)
    n = samples.size
    emp_hi = np.arange(1, n + 1) / n
    emp_lo = np.arange(0, n) / n
    return float(np.max(np.maximum(np.abs(emp_hi - target), np.abs(emp_lo - target))))
