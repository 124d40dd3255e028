"""Domain and I/O models for stickyflows."""
