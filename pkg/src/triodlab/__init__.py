"""Curvature flow of planar triple-junction networks with varifold diagnostics."""

from .geometry import (
    Curve,
    Network,
    TriodFrame,
    d_metric,
    dist_to_triod,
    standard_triod,
    validate,
)
from .flow import (
    FlowTrajectory,
    ForcingField,
    Scenario,
    detect_events,
    discrete_curvature,
    regrid,
    run,
    step,
)
from .varifold import (
    DiscreteVarifold,
    brakke_residual,
    first_variation,
    length_defect,
    to_varifold,
    weigh,
)

__version__ = "0.1.0"
