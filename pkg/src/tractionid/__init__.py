"""Online traction-parameter identification for off-road vehicles.

Longitudinal wheel/body dynamics, an empirical adhesion-slip model, an
adaptive unscented Kalman filter with a fuzzy supervisor, and offline
analysis of the resulting estimate logs.
"""

__version__ = "0.1.0"
