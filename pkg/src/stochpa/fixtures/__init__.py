"""Game fixtures shipped with the package."""
from importlib import resources
from pathlib import Path

from ..model import GameModel, load_model

FIXTURES = ("coin-persuasion-v1", "screening-h3-v1", "matching-pennies-v1")


def fixture_text(name: str) -> str:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}")
    return resources.files(__name__).joinpath(f"{name}.json").read_text(encoding="utf-8")


def load_fixture(name: str) -> GameModel:
    return load_model(fixture_text(name))


def resolve_model(spec: str) -> GameModel:
    """A fixture name or a path to a game file."""
    if spec in FIXTURES and not Path(spec).exists():
        return load_fixture(spec)
    return load_model(Path(spec))
