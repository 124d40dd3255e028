"""Core utilities: identity hashing and random sub-stream derivation."""
