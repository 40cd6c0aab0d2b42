from .distribution import (
    GridDistribution,
    Moments,
    ParticleEnsemble,
    default_x_max,
    lognormal_density,
    lognormal_ensemble,
    make_grid,
    moments_of,
)
from .moments import (
    SentimentPath,
    VariancePath,
    gamma_coefficient,
    interaction_rule,
    sentiment_closed_form,
    sentiment_rk4,
    variance_rhs,
    variance_solve,
)
from .neumann import GainOperator, NeumannResult, fixed_point_residual, neumann_norm_bound, neumann_solve, transported_initial
from .params import REFERENCE_BETA, REFERENCE_DELTA, REFERENCE_Q, KineticParams, load_params, save_params
from .particles import ParticleRun, particle_simulate
from .paths import ForcingPath, propagate_linear, rk4
