"""Coherent-state fluctuation expansions, model Hamiltonians and coherent intertwiners."""
from .errors import CohFluctError, NumericalCheckError, ValidationError

__version__ = "0.1.0"
