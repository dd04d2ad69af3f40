#!/usr/bin/env python3
"""
Entry point for running as a module: python -m fusionlab
"""

import sys

from .main import main

if __name__ == "__main__":
    sys.exit(main())
