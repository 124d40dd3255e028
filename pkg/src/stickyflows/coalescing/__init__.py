"""Coalescing Brownian motions and the three-path splitting bound."""

from stickyflows.coalescing.splitting import fit_exponent, splitting_probability
from stickyflows.coalescing.system import CoalescingBatch, simulate_coalescing

__all__ = ["CoalescingBatch", "fit_exponent", "simulate_coalescing", "splitting_probability"]
