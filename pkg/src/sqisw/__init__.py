"""Circuit synthesis over the SQiSW gate and single-qubit rotations."""
from .circuit import Circuit, GatePlacement, evaluate, instantiate, structure_of
from .errors import ConvergenceFailure, DimensionError, NonUnitaryError, NotFound
from .matcore import error_metric, haar_random_unitary
from .weyl import InteractionCoefficients, interaction_coefficients, kak_decompose, sqisw_cost

__all__ = [
    "Circuit", "GatePlacement", "evaluate", "instantiate", "structure_of",
    "ConvergenceFailure", "DimensionError", "NonUnitaryError", "NotFound",
    "error_metric", "haar_random_unitary",
    "InteractionCoefficients", "interaction_coefficients", "kak_decompose", "sqisw_cost",
]
