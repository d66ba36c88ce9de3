"""
Main entry point for the ACE command line.
Run with: python -m app.main <command> ...
"""

import sys

from app.cli import main

if __name__ == "__main__":
    sys.exit(main())
