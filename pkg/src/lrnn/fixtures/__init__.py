"""Bundled template/example/query files exercising the engine.

Each fixture directory holds a `template.lrnn`, an `examples.lrnn` and,
where training or prediction makes sense, a `queries.lrnn`.
"""

from pathlib import Path

_ROOT = Path(__file__).resolve().parent


def fixture_names() -> list:
    return sorted(p.name for p in _ROOT.iterdir() if p.is_dir() and not p.name.startswith("_"))


def fixture_dir(name: str) -> Path:
    path = _ROOT / name
    if not path.is_dir():
        raise KeyError(f"no bundled fixture named {name!r} (have: {', '.join(fixture_names())})")
    return path


def fixture_text(name: str, filename: str) -> str:
    return (fixture_dir(name) / filename).read_text(encoding="utf-8")
