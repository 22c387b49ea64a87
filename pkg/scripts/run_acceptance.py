"""Run the acceptance suite and print one PASS/FAIL line per criterion.

Usage: python3 scripts/run_acceptance.py [extra pytest args]
Exit status is pytest's (non-zero while any criterion fails).
"""
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    sys.exit(pytest.main([str(ROOT / "tests" / "test_acceptance.py"), "-q", "-p", "no:warnings",
                          *sys.argv[1:]]))
