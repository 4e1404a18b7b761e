"""End-to-end runs of the full pipeline on generated sequences."""
