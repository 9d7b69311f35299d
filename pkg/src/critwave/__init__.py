"""critwave: numerical laboratory for the blow-up/global-existence dichotomy
of weakly coupled semilinear damped-wave and reaction-diffusion systems on a
periodic torus."""

from .backend import backend_name, compiled_available
from .criticality import alpha_max, classify, fujita_exponent, predicted_law
from .grid import GridSpec, make_grid
from .problem import InitialDataSpec, ProblemSpec, check_hypotheses
from .rundriver import RunConfig, RunResult, Trajectory, matsumura_fit, run
from .sweep import FitResult, SweepSpec, SweepTable, fit_scaling, run_sweep

__version__ = "0.1.0"

__all__ = [
    "GridSpec", "make_grid", "InitialDataSpec", "ProblemSpec",
    "check_hypotheses", "alpha_max", "fujita_exponent", "classify",
    "predicted_law", "RunConfig", "RunResult", "Trajectory", "run",
    "matsumura_fit", "SweepSpec", "SweepTable", "FitResult", "run_sweep",
    "fit_scaling", "backend_name", "compiled_available", "__version__",
]
