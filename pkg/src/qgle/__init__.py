"""Quantum Brownian motion with c-number noise.

Library for the generalized Langevin dynamics of a particle whose bath enters
through an exponentially correlated friction kernel and a quantum
fluctuation-dissipation noise: exact variances, Fokker-Planck/diffusion
coefficients, a bath-sampling Monte Carlo integrator and an overdamped
quantum Smoluchowski solver.
"""

from .errors import (
    BathResolutionError,
    CoefficientSingularityError,
    ConvergenceError,
    DivergentIntegralError,
    QgleError,
    QuadratureError,
    SolverStabilityError,
)
from .kernel import (
    DerivedKernelConstants,
    KernelParams,
    ThermalState,
    classical_correlation,
    memory_kernel,
    noise_correlation,
    spectral_density,
)
from .relaxation import (
    H_analytic,
    RelaxationEvaluator,
    h_analytic,
    hdot_analytic,
    relaxation_ode_oracle,
)
from .variances import (
    VarianceCalculator,
    VariancePoint,
    VarianceSeries,
    classical_variances,
    sigma_vv_closed_form,
    sigma_xv,
    sigma_xx_closed_form,
    variance_series,
    variances_frequency_oracle,
)
from .fpe import (
    FpeCoefficients,
    GaussianPhaseState,
    delta0,
    fpe_coefficients,
    joint_density,
    marginal_density,
    quantum_diffusion_coefficient,
)
from .langevin import (
    BathRealization,
    DiscreteBath,
    TrajectoryEnsemble,
    discretize_bath,
    integrate_gle,
    sample_noise,
)
from .smoluchowski import (
    CorrectionState,
    DensityField,
    PotentialSpec,
    evolve_corrections,
    overdamped_diffusion,
    overdamped_langevin_check,
    quantum_dispersion_force,
    solve_smoluchowski,
)

__version__ = "0.1.0"
