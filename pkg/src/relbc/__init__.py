"""Simulation and security certification for relativistic bit commitment by
transmitting BB84 measurement outcomes."""

from .adversary import AttackStrategy, estimate_cheat_probability, loss_attack_check, run_cheat_trial
from .discrimination import MU, NOISE_THRESHOLD, azuma_bound, holevo_certificate, optimal_povm, security_bound, win_probability
from .protocol import RunConfig, run_honest
from .spacetime import EventPoint, causal_relation, standard_geometry

__version__ = "0.1.0"
