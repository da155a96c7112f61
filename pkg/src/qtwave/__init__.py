"""Quantized tensor-train simulation of the isotropic wave equation."""

__version__ = "0.1.0"
