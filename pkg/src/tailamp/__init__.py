"""Amplitude-amplified tail-risk estimation for stochastic structural models."""

__version__ = "0.1.0"
