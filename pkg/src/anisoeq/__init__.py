"""Anisotropic plasma equilibria built from isotropic seeds, with residual verification."""

__version__ = "0.1.0"
