"""Robustness of quantum memories: bounds, SDPs, games, simulation and dynamics."""

from .channels import ChoiState, QuantumChannel, family, tensor, compose
from .dynamics import BathModel, PulseSequence, qubit_bath_model, trajectory
from .errors import CapacityError, InvalidInputError, ParseError, QmemError, SolverError
from .games import Game, canned_game, game_to_witness, payoff, witness_to_game
from .robustness import (
    RobustnessResult,
    dmax,
    eig_lower_bound,
    log_robustness,
    moment_lower_bound,
    robustness_ppt,
    synthesis_cost,
)
from .sdp import SdpOptions, SdpProblem, SdpSolution, solve
from .simulation import QuasiDecomposition, decompose, sample_estimate, synthesis_superchannel

__version__ = "0.1.0"

__all__ = [
    "BathModel", "CapacityError", "ChoiState", "Game", "InvalidInputError", "ParseError",
    "PulseSequence", "QmemError", "QuantumChannel", "QuasiDecomposition", "RobustnessResult",
    "SdpOptions", "SdpProblem", "SdpSolution", "SolverError", "canned_game", "compose",
    "decompose", "dmax", "eig_lower_bound", "family", "game_to_witness", "log_robustness",
    "moment_lower_bound", "qubit_bath_model", "payoff", "robustness_ppt", "sample_estimate",
    "solve", "synthesis_cost", "synthesis_superchannel", "tensor", "trajectory", "witness_to_game",
]
