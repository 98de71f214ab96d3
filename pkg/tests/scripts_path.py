"""Make the repo's scripts/ importable from tests."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "scripts"))


def ensure() -> None:
    pass
