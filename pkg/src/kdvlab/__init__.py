"""KdV-hierarchy computer algebra and pseudospectral decay experiments."""

__version__ = "0.1.0"
