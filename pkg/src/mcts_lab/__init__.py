"""Monte Carlo tree search with on-the-go abstractions, exact oracles and an experiment harness."""
__version__ = "0.1.0"
