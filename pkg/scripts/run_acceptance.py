"""Run the acceptance criteria and print one pass/fail line per criterion."""

import sys
from pathlib import Path

import pytest

root = Path(__file__).resolve().parent.parent
sys.exit(pytest.main([str(root / "tests" / "test_acceptance.py"), "-q", "-m", "acceptance"]))
