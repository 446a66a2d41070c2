"""Two-layer (population + infrastructure) networked SIR model with global,
distributed and local effective reproduction numbers."""

__version__ = "0.1.0"

from .model import (AssumptionError, DimensionError, ModelParams, State, assemble_blocks,
                    derivative, derivative_compact, validate_params)
from .integrator import (CrossingEvent, IntegrationError, IntegrationSettings, Trajectory,
                         detect_crossings, simulate)
from .spectral import ConvergenceError, DominantPair, dominant_metzler, is_strongly_connected, spectral_radius
from .reproduction import (ReproductionReport, drn_infrastructure, drn_population, global_R, lern,
                           pairwise_infection_derivative, reproduction_matrix, reproduction_report)
from .analysis import (PeakReport, TheoremReport, classify_equilibrium, find_global_peak,
                       run_theorem_suite, weighted_average_trace)
from .scenario import GeneratorSpec, Scenario, generate_scenario, load_scenario
