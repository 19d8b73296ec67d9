from ._version import __version__
from .config import ExperimentConfig, SolverConfig, Variant
from .diagnostics import SaddleCertificate, certificate_search, reference_solution
from .experiment import generate_instance, run_experiment
from .geometry import FeasibleSet, MirrorMap, NegativeEntropy, SquaredEuclidean
from .graph import AveragingMatrix, Graph
from .problem import LinearObjective, OracleObjective, ProblemInstance
from .solver import run
from .trace import RunTrace

__all__ = [
    "__version__",
    "AveragingMatrix",
    "ExperimentConfig",
    "FeasibleSet",
    "Graph",
    "LinearObjective",
    "MirrorMap",
    "NegativeEntropy",
    "OracleObjective",
    "ProblemInstance",
    "RunTrace",
    "SaddleCertificate",
    "SolverConfig",
    "SquaredEuclidean",
    "Variant",
    "certificate_search",
    "generate_instance",
    "reference_solution",
    "run",
    "run_experiment",
]
