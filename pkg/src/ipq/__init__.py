"""Identical-particle qubits under non-Markovian bosonic reservoirs, LEO pulses and WWM error correction."""

__version__ = "0.1.0"

from .bath import LorentzianSpectrum
from .collective import CollectiveScenario, GateKind, SolverSettings, run_collective
from .individual import IndividualScenario, run_individual
from .observables import InitialState
from .pulses import PulseTrain

__all__ = [
    "CollectiveScenario",
    "GateKind",
    "IndividualScenario",
    "InitialState",
    "LorentzianSpectrum",
    "PulseTrain",
    "SolverSettings",
    "__version__",
    "run_collective",
    "run_individual",
]
