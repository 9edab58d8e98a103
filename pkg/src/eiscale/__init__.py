"""Scale-dependent effective information of lattice dynamics under MaxEnt
interventions: Ising and stigmergy simulators, MI estimation, and the
Gaussian-channel peak bound."""

__version__ = "0.1.0"

from .experiment import EiCurve, ExperimentConfig, run_curve, robustness_sweep  # noqa: E402,F401
