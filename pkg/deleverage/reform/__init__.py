"""Reformulation into separable difference-of-convex form."""

from deleverage.reform.congruence import (
    DcReform,
    f_hat,
    g_hat,
    reformulate,
    simultaneous_diagonalize,
    to_strategy,
)
from deleverage.reform.spectral import SpectralSplit, spectral_split, split_psd

__all__ = [
    "SpectralSplit",
    "spectral_split",
    "split_psd",
    "DcReform",
    "simultaneous_diagonalize",
    "reformulate",
    "f_hat",
    "g_hat",
    "to_strategy",
]
