"""Artifact writers: CSV, JSON, binary dumps and SVG plots."""
