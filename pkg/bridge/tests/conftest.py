import sys
from pathlib import Path

_BRIDGE = Path(__file__).resolve().parents[1]
for entry in (str(_BRIDGE / "src"), str(_BRIDGE.parent / "src")):
    if entry not in sys.path:
        sys.path.insert(0, entry)
