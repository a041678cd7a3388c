"""scorefdt: moment-response prediction for stochastic dynamical systems.

Estimates the score (gradient of the log steady-state density) of a system
from simulation data, builds conjugate observables for external
perturbations, and predicts the response of the mean and higher central
moments via the fluctuation-dissipation relation, with ensemble ground
truth and maximum-entropy density reconstruction for validation.
"""

__version__ = "0.1.0"
