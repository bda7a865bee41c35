"""
FloquetQS - Quasi-stationary states of periodically driven open quantum systems
"""

__version__ = "1.0.0"
__author__ = "FloquetQS Team"
