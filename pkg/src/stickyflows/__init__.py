"""stickyflows - sticky Brownian motion families and their prelimit diffusions."""

__version__ = "0.1.0"
