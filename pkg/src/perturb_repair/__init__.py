"""Self-supervised repair of MJ programs from perturbed correct code."""
__version__ = "0.1.0"
