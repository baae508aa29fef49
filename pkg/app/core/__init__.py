"""Core modules"""

