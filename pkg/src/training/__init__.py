"""Targets, losses and the phased training schedule."""
