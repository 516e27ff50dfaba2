"""Model-based learning with feature subspaces on stochastic gridworlds."""

__version__ = "0.1.0"
