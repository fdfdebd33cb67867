"""Experiment harness: phantoms, noise, configuration, traces, and the CLI."""

from .config import CTConfig, IntegralConfig, config_hash, parse_config
from .phantoms import add_noise, make_integral_phantom
from .rng import PortableRng
from .experiments import run_ct_experiment, run_integral_experiment

__all__ = [
    "CTConfig",
    "IntegralConfig",
    "PortableRng",
    "add_noise",
    "config_hash",
    "make_integral_phantom",
    "parse_config",
    "run_ct_experiment",
    "run_integral_experiment",
]
