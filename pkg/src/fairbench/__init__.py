"""Fair, reproducible comparison of stochastic optimizers."""

__version__ = "0.1.0"
