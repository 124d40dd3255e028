"""Reference sticky Brownian motion."""

from stickyflows.sticky.reference import occupation_statistics, simulate_sticky

__all__ = ["occupation_statistics", "simulate_sticky"]
