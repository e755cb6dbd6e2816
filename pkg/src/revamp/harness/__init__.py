from .config import ExperimentConfig, load_config, parse_config
from .experiment import NmseReport, RunRecord, aggregate, collect, generate_instance, run_experiment

__all__ = [
    "ExperimentConfig", "load_config", "parse_config",
    "NmseReport", "RunRecord", "aggregate", "collect", "generate_instance", "run_experiment",
]
