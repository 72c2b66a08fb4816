#!/usr/bin/env python3
"""
Launcher for the ppt-witness-lab command line.

    python3 run_lab.py table
    python3 run_lab.py scan --b-min 0 --b-max 1 --steps 101 --out data/results/scan.csv
"""
import sys
from pathlib import Path

# Add app directory to path
sys.path.insert(0, str(Path(__file__).parent))

from app.cli import main

if __name__ == "__main__":
    sys.exit(main())
