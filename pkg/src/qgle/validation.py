"""Acceptance criteria for the whole artifact, runnable as a suite.

Each criterion function returns one or more :class:`CriterionResult` rows with
the measured value, the target, and a pass/fail verdict.  Rows whose
``expected_failure`` flag is set describe stated targets that the underlying
mathematics provably cannot meet; the analysis lives in the row's detail so
the report stays self-explanatory.  The CLI ``validate`` command prints the
rows and exits nonzero only on unexpected failures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .fpe import delta0, fpe_coefficients, quantum_diffusion_coefficient
from .kernel import KernelParams, ThermalState
from .langevin import (
    discrete_noise_correlation,
    discretize_bath,
    integrate_gle,
    sample_noise_ensemble,
)
from .relaxation import H_analytic, h_analytic, relaxation_ode_oracle
from .smoluchowski import (
    CorrectionState,
    DensityField,
    PotentialSpec,
    evolve_corrections,
    ks_distance,
    overdamped_diffusion,
    overdamped_langevin_check,
    solve_smoluchowski,
)
from .variances import VarianceCalculator

__all__ = ["CriterionResult", "run_all", "run_criterion", "CRITERIA"]

_SEED = 42


@dataclass
class CriterionResult:
    cid: str
    description: str
    passed: bool
    measured: str
    target: str
    detail: str = ""
    expected_failure: bool = False

    @property
    def status(self) -> str:
        if self.passed:
            return "PASS"
        return "FAIL(expected)" if self.expected_failure else "FAIL"

    def line(self) -> str:
        extra = f"  [{self.detail}]" if self.detail else ""
        return f"[{self.status}] {self.cid}: {self.description} | measured {self.measured} vs {self.target}{extra}"


@lru_cache(maxsize=None)
def _standard() -> tuple[KernelParams, ThermalState]:
    return KernelParams(1.0, 1.0), ThermalState(10.0)


@lru_cache(maxsize=None)
def _standard_calc() -> VarianceCalculator:
    k, th = _standard()
    return VarianceCalculator(k, th, t_max=50.0)


@lru_cache(maxsize=None)
def _standard_bath():
    k, _ = _standard()
    return discretize_bath(k, 500, 50.0)


def _c1_diffusive_slope():
    calc = _standard_calc()
    ts = np.linspace(20.0, 50.0, 13)
    sxx = np.array([calc.point(t).sxx for t in ts])
    slope = float(np.polyfit(ts, sxx, 1)[0])
    return [
        CriterionResult(
            "C1",
            "late-time diffusive growth: linear-fit slope of sxx on [20, 50]",
            abs(slope / 20.0 - 1.0) <= 0.03,
            f"{slope:.4f}",
            "20 within 3% (kbt=10, gamma0=1)",
        )
    ]


def _c2_equipartition():
    calc = _standard_calc()
    svv = calc.point(50.0).svv
    return [
        CriterionResult(
            "C2",
            "velocity-variance plateau svv(50)",
            abs(svv / 10.0 - 1.0) <= 0.02,
            f"{svv:.4f}",
            "10 within 2%",
        )
    ]


def _c3_closed_form_agreement():
    k, _ = _standard()
    rows = []
    worst = 0.0
    for kbt in (0.0, 1.0, 10.0):
        calc = VarianceCalculator(k, ThermalState(kbt), t_max=20.0)
        for t in (0.5, 1.0, 2.0, 5.0, 10.0, 20.0):
            p = calc.point(t)
            for val, ref in (
                (calc.sigma_xx_closed_form(t), p.sxx),
                (calc.sigma_vv_closed_form(t), p.svv),
            ):
                if abs(ref) >= 1e-8:
                    worst = max(worst, abs(val - ref) / abs(ref))
    rows.append(
        CriterionResult(
            "C3",
            "closed-form integrand (winning variants) vs frequency oracle",
            worst <= 1e-4,
            f"max rel diff {worst:.2e}",
            "<= 1e-4 over t x kbt grid",
        )
    )
    # record the variant resolution with measured mismatches of the losers
    calc = VarianceCalculator(k, ThermalState(1.0), t_max=5.0)
    p5 = calc.point(5.0)
    a2_printed = calc.sigma_xx_closed_form(5.0, a2_variant="printed")
    pref_printed = calc.sigma_xx_closed_form(5.0, prefactor_variant="printed")
    vv_printed = calc.sigma_vv_closed_form(5.0, form="printed")
    vv_printed_a2 = calc.sigma_vv_closed_form(5.0, a2_variant="printed", form="printed")
    rows.append(
        CriterionResult(
            "C3-variants",
            "typo resolution record",
            True,
            (
                f"a2 printed dev {abs(a2_printed - p5.sxx) / p5.sxx:.1e}; "
                f"prefactor printed dev {abs(pref_printed - p5.sxx) / p5.sxx:.1e}; "
                f"velocity printed dev {abs(vv_printed - p5.svv) / p5.svv:.1e} "
                f"(a2-printed {abs(vv_printed_a2 - p5.svv) / p5.svv:.1e})"
            ),
            "winners: a2 symmetrized; cross prefactor amplitude-squared; velocity corrected regrouping",
            detail="printed velocity seven-term form fails for both a2 variants; corrected form adopted",
        )
    )
    return rows


def _c4_relaxation_oracle():
    rows = []
    t = np.linspace(0.0, 50.0, 1001)
    worst = 0.0
    for g0, tc in ((1.0, 1.0), (0.275, 1.0), (2.0, 0.5)):
        k = KernelParams(g0, tc)
        big_h, small_h = relaxation_ode_oracle(k, t)
        worst = max(
            worst,
            float(np.max(np.abs(big_h - H_analytic(k, t)))),
            float(np.max(np.abs(small_h - h_analytic(k, t)))),
        )
    rows.append(
        CriterionResult(
            "C4",
            "analytic relaxation functions vs ODE oracle, three parameter sets",
            worst <= 1e-8,
            f"max abs err {worst:.2e}",
            "<= 1e-8 on [0, 50]",
        )
    )
    return rows


def _c5_noise_fdr():
    bath = _standard_bath()
    lags = np.arange(20) * 0.25
    n_real = 10_000
    worst = 0.0
    for kbt in (0.0, 1.0, 10.0):
        th = ThermalState(kbt)
        f = sample_noise_ensemble(bath, th, lags, seed=_SEED, n_realizations=n_real)
        ref = discrete_noise_correlation(bath, th, lags)
        est = (f[:, :1] * f).mean(axis=0)
        stderr = np.sqrt((ref[0] ** 2 + ref**2) / n_real)
        worst = max(worst, float(np.max(np.abs((est - ref) / stderr))))
    return [
        CriterionResult(
            "C5",
            "sampled-noise autocorrelation vs discrete quantum FDR sum, 20 lags",
            worst <= 3.0,
            f"max |z| {worst:.2f}",
            "<= 3 standard errors at kbt in {0, 1, 10}",
        )
    ]


def _c6_ensemble_vs_oracle():
    k, th = _standard()
    bath = _standard_bath()
    t_grid = np.array([0.0, 1.0, 5.0, 20.0])
    ens = integrate_gle(k, bath, th, None, 0.0, 0.0, t_grid, seed=_SEED, n_traj=10_000)
    calc = _standard_calc()
    worst = 0.0
    for j, t in enumerate(t_grid[1:], start=1):
        p = calc.point(float(t))
        stderr_x = p.sxx * math.sqrt(2.0 / (ens.n_traj - 1))
        stderr_v = p.svv * math.sqrt(2.0 / (ens.n_traj - 1))
        worst = max(
            worst,
            abs(ens.var_x()[j] - p.sxx) / stderr_x,
            abs(ens.var_v()[j] - p.svv) / stderr_v,
        )
    return [
        CriterionResult(
            "C6",
            "free-particle Monte Carlo variances vs oracle at t in {1, 5, 20}",
            worst <= 3.0,
            f"max |z| {worst:.2f}",
            "<= 3 standard errors (1e4 trajectories)",
        )
    ]


def _c7_covariance_slope_identity():
    calc = _standard_calc()
    worst = 0.0
    for t in np.linspace(0.7, 45.0, 10):
        p = calc.point(float(t))
        worst = max(worst, abs(p.sxv - 0.5 * p.dsxx_dt) / max(abs(p.sxv), 1e-300))
    return [
        CriterionResult(
            "C7",
            "direct sxv vs half the analytic slope of sxx at 10 times",
            worst <= 1e-5,
            f"max rel diff {worst:.2e}",
            "<= 1e-5",
        )
    ]


def _c8_diffusion_limits():
    rows = []
    k, th = _standard()
    d0 = delta0(k, th)
    dq = quantum_diffusion_coefficient(k, th, 50.0, d0, calculator=_standard_calc())
    rows.append(
        CriterionResult(
            "C8a",
            "long-time quantum diffusion coefficient at kbt=10",
            abs(dq / 10.0 - 1.0) <= 0.03,
            f"{dq:.4f}",
            "kbt/gamma0 = 10 within 3%",
        )
    )

    k7 = KernelParams(0.275, 1.0)
    th0 = ThermalState(0.0)
    d00 = delta0(k7, th0)
    calc7 = VarianceCalculator(k7, th0, t_max=50.0)
    ts = np.concatenate([np.linspace(0.0, 10.0, 41), [15.0, 20.0, 25.0, 50.0]])
    dq0 = np.array(
        [quantum_diffusion_coefficient(k7, th0, float(t), d00, calculator=calc7) for t in ts]
    )
    nonneg = bool(np.all(dq0 >= -1e-12))
    imax = int(np.argmax(dq0))
    rises = 0 < imax < ts.size - 1
    rows.append(
        CriterionResult(
            "C8b-shape",
            "vacuum diffusion coefficient nonnegative and rising to a maximum",
            nonneg and rises,
            f"min {dq0.min():.2e}, max at t={ts[imax]:.2f}",
            "nonnegative, interior maximum (kbt=0, gamma0=0.275)",
        )
    )
    stability = abs(dq0[-1] / dq0[-2] - 1.0)
    rows.append(
        CriterionResult(
            "C8b-asymptote",
            "vacuum diffusion coefficient settles to a positive constant",
            stability <= 0.01,
            f"D_q(50)/D_q(25) - 1 = {stability * 100:.0f}% (D_q: {dq0[-2]:.4f} -> {dq0[-1]:.4f})",
            "stable to 1% between t and 2t",
            detail=(
                "unattainable as stated: at kbt=0 the position variance grows "
                "logarithmically, so sxv = sxx-slope/2 ~ 1/t and D_q decays to zero; "
                "a positive constant asymptote requires kbt > 0"
            ),
            expected_failure=True,
        )
    )
    return rows


def _c9_overdamped_coefficient():
    k = KernelParams(1.0, 1.0)
    hot = overdamped_diffusion(k, ThermalState(100.0), 1.0)
    cold = overdamped_diffusion(k, ThermalState(0.0), 1.0)
    mid = overdamped_diffusion(k, ThermalState(1.0), 1.0)
    closed = 0.5 / math.tanh(0.5)
    ok = (
        abs(hot / 100.0 - 1.0) <= 0.01
        and cold == 0.5
        and abs(mid - closed) <= 1e-12
    )
    return [
        CriterionResult(
            "C9",
            "overdamped diffusion coefficient limits and closed-form value",
            ok,
            f"hot {hot:.4f}, cold {cold}, mid {mid:.15f}",
            "kbt/gamma0 within 1%; hbar*w/2gamma0 exact; coth(1/2)/2 to 1e-12",
        )
    ]


def _c10_correction_invariant():
    t = np.linspace(0.0, 50.0, 501)
    rows = []
    ser_h = evolve_corrections(PotentialSpec.harmonic(1.0), CorrectionState.coherent(1.0), t)
    det_h = ser_h.determinant()
    drift_h = float(np.max(np.abs(det_h - det_h[0])) / det_h[0])
    width_dev = float(np.max(np.abs(ser_h.dxx - ser_h.dxx[0])) / ser_h.dxx[0])
    ser_q = evolve_corrections(
        PotentialSpec.quartic_perturbed(1.0, 0.1),
        CorrectionState.coherent(1.0, x=0.5),
        t,
    )
    det_q = ser_q.determinant()
    drift_q = float(np.max(np.abs(det_q - det_q[0])) / det_q[0])
    rows.append(
        CriterionResult(
            "C10",
            "uncertainty-determinant conservation and coherent-width stationarity",
            max(drift_h, drift_q) <= 1e-8 and width_dev <= 1e-8,
            f"drift harmonic {drift_h:.1e}, quartic {drift_q:.1e}, width dev {width_dev:.1e}",
            "<= 1e-8 relative over [0, 50]",
        )
    )
    return rows


def _c11_smoluchowski():
    rows = []
    k = KernelParams(1.0, 1.0)
    pot = PotentialSpec.harmonic(1.0)
    th = ThermalState(10.0)
    x = np.linspace(-25.0, 25.0, 1024)
    res = solve_smoluchowski(pot, k, th, 1.0, DensityField.gaussian(x, 1.0, 4.0), t_final=15.0)
    var_c = res.final.variance()
    mass_err = abs(res.final.mass - 1.0)
    rows.append(
        CriterionResult(
            "C11a",
            "drift-diffusion stationary variance, classical regime",
            abs(var_c / 10.0 - 1.0) <= 0.02 and mass_err <= 1e-9,
            f"var {var_c:.4f}, mass err {mass_err:.1e}",
            "kbt/w^2 = 10 within 2%, mass to 1e-9",
        )
    )
    th0 = ThermalState(0.0)
    x0 = np.linspace(-7.0, 7.0, 1024)
    res0 = solve_smoluchowski(pot, k, th0, 1.0, DensityField.gaussian(x0, 0.2, 0.7), t_final=15.0)
    var_v = res0.final.variance()
    rows.append(
        CriterionResult(
            "C11b",
            "drift-diffusion stationary variance at zero temperature",
            abs(var_v / 0.5 - 1.0) <= 0.02,
            f"var {var_v:.5f}",
            "hbar/2w = 0.5 within 2%",
        )
    )
    ens = overdamped_langevin_check(pot, k, th, 1.0, n_traj=100_000, seed=_SEED)
    ks = ks_distance(ens.positions, res.final)
    rows.append(
        CriterionResult(
            "C11c",
            "overdamped Langevin histogram vs solver stationary density",
            ks < 0.02,
            f"KS {ks:.4f}",
            "< 0.02 at 1e5 samples",
        )
    )
    return rows


def _c12_fpe_stationarity():
    k, th = _standard()
    d0 = delta0(k, th)
    # coefficients at the end of the convergence ladder, away from h-zeros
    from .fpe import _nudge_off_zeros

    t_inf = _nudge_off_zeros(k, 80.0 / min(k.gamma0, 1.0 / k.tau_c))
    coeff = fpe_coefficients(k, th, t_inf, calculator=VarianceCalculator(k, th, t_max=t_inf))
    v = np.linspace(-4.0 * math.sqrt(d0), 4.0 * math.sqrt(d0), 81)
    phi_v = np.exp(-0.5 * v * v / d0) / math.sqrt(2.0 * math.pi * d0)
    flux = coeff.xi * v * phi_v + coeff.phi * (-v / d0) * phi_v
    scale = float(np.max(np.abs(coeff.xi * v * phi_v)))
    worst = float(np.max(np.abs(flux))) / scale
    rows = [
        CriterionResult(
            "C12a",
            "stationary Maxwellian makes the phase-space flux vanish",
            worst <= 1e-8,
            f"max |flux|/scale {worst:.2e}",
            "<= 1e-8 pointwise",
        ),
        CriterionResult(
            "C12b",
            "stationary velocity width equals the thermal value",
            abs(d0 / 10.0 - 1.0) <= 0.02,
            f"delta0 {d0:.4f}",
            "kbt = 10 within 2%",
        ),
    ]
    return rows


def _c13_morphology():
    rows = []
    k, th = _standard()
    calc = _standard_calc()

    tt = np.array([0.01, 0.02, 0.04, 0.07, 0.1])
    sx = np.array([calc.point(float(t)).sxx for t in tt])
    slope_early = float(np.polyfit(np.log(tt), np.log(sx), 1)[0])
    rows.append(
        CriterionResult(
            "C13-onset",
            "early-time log-log slope of sxx for t < 0.1",
            1.9 <= slope_early <= 2.1,
            f"slope {slope_early:.2f}",
            "in [1.9, 2.1]",
            detail=(
                "unattainable as stated: sxx has no quadratic onset; its first "
                "three derivatives vanish at t=0 and the classical expansion gives "
                "sxx = kbt*gamma(0)*t^4/4 + O(t^5), so the slope below t=0.1 is ~4. "
                "The slope passes through 2 near t ~ 2.5"
            ),
            expected_failure=True,
        )
    )

    ts = np.linspace(25.0, 50.0, 6)
    sxx = np.array([calc.point(float(t)).sxx for t in ts])
    slope_late = float(np.polyfit(np.log(ts), np.log(sxx), 1)[0])
    rows.append(
        CriterionResult(
            "C13-crossover",
            "late-time log-log slope of sxx for t > 20",
            0.95 <= slope_late <= 1.05,
            f"slope {slope_late:.3f}",
            "in [0.95, 1.05]",
        )
    )

    th0 = ThermalState(0.0)
    monotone_all = True
    rate_oscillates_all = True
    details = []
    for tc in (0.3, 0.5, 1.0, 2.0):
        kc = KernelParams(1.0, tc)
        c0 = VarianceCalculator(kc, th0, t_max=10.0)
        ts5 = np.linspace(0.1, 10.0, 120)
        ds = np.array([c0.point(float(t)).dsxx_dt for t in ts5])
        d2 = np.array([c0.point(float(t)).dsxv_dt for t in ts5])
        value_turns = int(np.sum(np.diff(np.sign(ds)) != 0))
        rate_turns = int(np.sum(np.diff(np.sign(d2)) != 0))
        monotone_all &= value_turns == 0
        rate_oscillates_all &= rate_turns >= 1
        details.append(f"tau_c={tc}: value turns {value_turns}, growth-rate turns {rate_turns}")
    rows.append(
        CriterionResult(
            "C13-vacuum-oscillation",
            "vacuum sxx non-monotone at early times across the tau_c sweep",
            not monotone_all,
            "; ".join(details),
            "sxx itself non-monotone",
            detail=(
                "unattainable as stated: sxv stays nonnegative at kbt=0 so sxx is "
                "monotone; the vacuum oscillation appears in the growth rate instead "
                "(second derivative changes sign on every curve: "
                f"{'yes' if rate_oscillates_all else 'no'})"
            ),
            expected_failure=True,
        )
    )

    c0 = VarianceCalculator(KernelParams(1.0, 1.0), th0, t_max=50.0)
    svv30 = c0.point(30.0).svv
    svv50 = c0.point(50.0).svv
    rows.append(
        CriterionResult(
            "C13-vacuum-plateau",
            "vacuum velocity variance settles at a positive value",
            svv30 > 0.0 and abs(svv50 / svv30 - 1.0) <= 0.01,
            f"svv(30) {svv30:.5f}, svv(50) {svv50:.5f}",
            "positive plateau, flat to 1%",
        )
    )
    return rows


CRITERIA = {
    "C1": _c1_diffusive_slope,
    "C2": _c2_equipartition,
    "C3": _c3_closed_form_agreement,
    "C4": _c4_relaxation_oracle,
    "C5": _c5_noise_fdr,
    "C6": _c6_ensemble_vs_oracle,
    "C7": _c7_covariance_slope_identity,
    "C8": _c8_diffusion_limits,
    "C9": _c9_overdamped_coefficient,
    "C10": _c10_correction_invariant,
    "C11": _c11_smoluchowski,
    "C12": _c12_fpe_stationarity,
    "C13": _c13_morphology,
}


def run_criterion(cid: str) -> list[CriterionResult]:
    return CRITERIA[cid]()


def run_all() -> list[CriterionResult]:
    results = []
    for fn in CRITERIA.values():
        results.extend(fn())
    return results
