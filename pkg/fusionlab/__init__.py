"""
fusionlab
Exact fusion rings and modular data for weakly integral modular categories.
"""

__version__ = "0.1.0"
