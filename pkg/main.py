"""
Line resonance toolkit - command-line entry point

    python main.py spectrum --config run.json --method closed-form
    python main.py sweep --config run.json --modes 1 2 3
    python main.py validate --seed 7
"""
import sys

from cli import main

if __name__ == "__main__":
    sys.exit(main())
