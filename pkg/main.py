#!/usr/bin/env python3
"""
Main entry point for the IL-(P) Workbench when run from a checkout.
"""

import sys
from pathlib import Path

# Add the project root to the Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from ilp_workbench.cli import main


if __name__ == "__main__":
    main()
