"""Certification toolkit for almost-Parseval-frame towers and their Moran measures."""

__version__ = "0.1.0"

from .tower import (
    Family,
    StructuredParams,
    Tower,
    TowerError,
    TowerStage,
    build_structured_stage,
    load_tower_config,
    make_family_tower,
    summability_report,
    tower_from_config,
)
from .stage import build_stage_matrices, verify_deviation_bound, verify_unitary
from .measure import (
    delta_empirical,
    delta_lower_bound,
    mu_tail_hat,
    nu_hat,
    zero_set_member,
)
from .frame import (
    StepFunction,
    build_level,
    certify_frame,
    level_frame_bounds,
    step_coefficient,
)
from .ortho import (
    ZeroSetElement,
    enumerate_zero_set,
    parity_certificate,
    search_orthogonal_sets,
)
from .dimension import dimension_trace
