"""Tracking network: encoder, map projection and heads."""
from .model import HEAD_OUTPUTS, OneTrackNet

__all__ = ["HEAD_OUTPUTS", "OneTrackNet"]
