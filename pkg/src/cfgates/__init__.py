"""Exact single-photon simulation of counterfactual logic gates.

Gates (NAND, M-type NAND, NOR, XOR) are built as explicit beam-splitter
networks and evaluated amplitude by amplitude. On top of them sit a channel
noise harness, quantum-controller pipelines for GHZ and W preparation, a small
pipeline description language and a command-line front end.
"""

from .entangle import AtomState, ghz_pipeline, ideal_oracle, run_gate_quantum, w_pipeline
from .errors import CfgatesError, ConfigurationError, ParameterError, UsageError
from .gates import (
    GateConfig,
    GateKind,
    OutcomeDistribution,
    counterfactual_audit,
    run_gate,
    run_nand2,
    run_nand_multi,
    run_nor,
    run_xor,
    theory_prediction,
)
from .noise import NoiseModel, noise_sweep, run_noisy
from .state import PhotonState

__version__ = "0.1.0"

__all__ = [
    "AtomState",
    "CfgatesError",
    "ConfigurationError",
    "GateConfig",
    "GateKind",
    "NoiseModel",
    "OutcomeDistribution",
    "ParameterError",
    "PhotonState",
    "UsageError",
    "counterfactual_audit",
    "ghz_pipeline",
    "ideal_oracle",
    "noise_sweep",
    "run_gate",
    "run_gate_quantum",
    "run_nand2",
    "run_nand_multi",
    "run_noisy",
    "run_nor",
    "run_xor",
    "theory_prediction",
    "w_pipeline",
]
