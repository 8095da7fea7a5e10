"""Decide whether sharing a (possibly degraded) message with consumers is worth the
risk."""

import importlib.metadata

from ._config import (
    ContinuousConfig,
    DensityFamilySpec,
    PropagationConfig,
    SimulationConfig,
    ValidationConfig,
)
from ._constants import ParallelOpName, SerialOpName, Severity, Verdict
from ._models import (
    ConsumerDensities,
    DecisionReport,
    DisclosureEdge,
    ImpactDistribution,
    ImpactModel,
    InferenceModel,
    Message,
    MessageDistribution,
    MessageSpace,
    Scenario,
)
from .impact import balance_q2, binary_threshold, evaluate, sweep
from .io import load_scenario, save_scenario
from .montecarlo import oracle_compare, simulate
from .propagation import disclose, effective_disclosure, message_distribution
from .validation import is_column_stochastic, validate_scenario

try:
    __version__ = importlib.metadata.version("sharerisk")
except importlib.metadata.PackageNotFoundError:
    __version__ = "0+unknown"

__all__ = [
    "ContinuousConfig",
    "DensityFamilySpec",
    "PropagationConfig",
    "SimulationConfig",
    "ValidationConfig",
    "ParallelOpName",
    "SerialOpName",
    "Severity",
    "Verdict",
    "ConsumerDensities",
    "DecisionReport",
    "DisclosureEdge",
    "ImpactDistribution",
    "ImpactModel",
    "InferenceModel",
    "Message",
    "MessageDistribution",
    "MessageSpace",
    "Scenario",
    "__version__",
    "balance_q2",
    "binary_threshold",
    "disclose",
    "effective_disclosure",
    "evaluate",
    "is_column_stochastic",
    "load_scenario",
    "message_distribution",
    "oracle_compare",
    "save_scenario",
    "simulate",
    "sweep",
    "validate_scenario",
]
