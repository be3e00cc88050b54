"""Spin-bath relaxation simulator and equilibration-time diagnostics."""

from ._kernels import KERNEL

__all__ = ["KERNEL"]
__version__ = "0.1.0"
