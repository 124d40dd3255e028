"""Run diagnostics and status badges."""
