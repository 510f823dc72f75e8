"""Analysis of revealing POMDPs: qualitative parity, grid value iteration,
and exact/Monte Carlo validation tools."""

from .belief import Belief, Grid, one_step_outcomes, project, update
from .model import ModelError, ModelValidationError, NotRevealingError, Pomdp, check_revealing, delta_min, validate
from .modelio import ModelParseError, load_model, parse_model, save_model, serialize_model
from .qualitative import almost_sure_parity_states, almost_sure_winning, limit_sure_winning, parity_region
from .quantitative import (
    belief_reach_value,
    extract_policy,
    horizon_for_accuracy,
    parity_value,
    reach_value,
    stopping_parameters,
    tstep_value,
)

__version__ = "0.1.0"
