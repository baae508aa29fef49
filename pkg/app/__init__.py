"""Sampled Sum-Type SMC Application"""
__version__ = "1.0.0"
