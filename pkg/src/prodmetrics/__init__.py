"""Exact Dobrushin and Steif distances on finite products of finite metric spaces."""

from importlib import resources

from .core import (
    BadCost,
    Config,
    CostOnPairs,
    Coupling,
    Distribution,
    FunctionOnX,
    InstanceError,
    ProductSpace,
    Rational,
    Site,
    SpaceMismatch,
    WeightVector,
    cost_e,
    cost_matrix_e,
    enumerate_configs,
    site_distance,
    validate_instance,
)
from .lp import LinearProgram, LpCertificationError, LpSolution, Status, solve
from .metrics import (
    DobrushinResult,
    SteifResult,
    dobrushin_distance,
    dual_potential_value,
    grid_lower_bound,
    steif_distance,
    transport_value,
    two_function_value,
)
from .smoothness import (
    c_transform,
    chain_bound_holds,
    dobrushin_norm,
    in_F_e,
    is_c_convex,
    is_one_lipschitz,
    partial_lipschitz,
)

__version__ = "0.1.0"


def bundled_instance(name: str):
    """Path-like handle to one of the bundled ``.inst`` example files."""
    return resources.files(__name__).joinpath("data", name)
