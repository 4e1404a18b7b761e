"""Tracking metrics and evaluation reports."""
