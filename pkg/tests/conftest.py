import sys
from pathlib import Path

_TESTS = Path(__file__).resolve().parent
_SRC = _TESTS.parent / "src"
for entry in (str(_TESTS), str(_SRC)):
    if entry not in sys.path:
        sys.path.insert(0, entry)
