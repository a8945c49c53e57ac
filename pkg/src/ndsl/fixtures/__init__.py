"""Bundled problem files."""
from pathlib import Path

FIXTURE_DIR = Path(__file__).resolve().parent
NAMES = ("trivial", "exampleA", "exampleB", "exampleA_q0")


def fixture_path(name: str) -> Path:
    path = FIXTURE_DIR / (name if name.endswith(".json") else f"{name}.json")
    if not path.exists():
        raise FileNotFoundError(f"no bundled fixture {name!r}; available: {', '.join(NAMES)}")
    return path
