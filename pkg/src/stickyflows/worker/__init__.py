"""Replica pool and run orchestration."""
