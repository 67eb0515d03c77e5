"""Mixed RBF Galerkin scheme for the hypersingular equation on the unit-square screen."""
from .analysis import ConvergenceRecord, compute_delta, eoc, expected_rate, extrapolate_energy, relative_error
from .assembly import RbfSpace, SaddleSystem, assemble_system
from .config import RunConfig
from .geometry import AssumptionViolation, build_extension, mesh_norm, uniform_nodes
from .kernels import wendland
from .solver import IllConditioned, RankDeficient, solve_saddle

__all__ = [
    "AssumptionViolation", "ConvergenceRecord", "IllConditioned", "RankDeficient", "RbfSpace", "RunConfig",
    "SaddleSystem", "assemble_system", "build_extension", "compute_delta", "eoc", "expected_rate",
    "extrapolate_energy", "mesh_norm", "relative_error", "solve_saddle", "uniform_nodes", "wendland",
]
