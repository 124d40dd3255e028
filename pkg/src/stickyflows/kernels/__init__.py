"""Flow of kernels: filtered particle histograms and the kernel SPDE."""

from stickyflows.kernels.filtering import filter_kernel
from stickyflows.kernels.grid import initial_gaussian, initial_point
from stickyflows.kernels.spde import spde_evolve
from stickyflows.kernels.stats import concentration_comparison, density_stats

__all__ = [
    "concentration_comparison",
    "density_stats",
    "filter_kernel",
    "initial_gaussian",
    "initial_point",
    "spde_evolve",
]
