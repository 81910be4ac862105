"""The shipped scenario corpus."""

from importlib import resources
from pathlib import Path

from ..errors import ValidationError


def _corpus_dir():
    return Path(str(resources.files("pawtime") / "scenarios"))


def list_scenarios():
    """Names of the shipped scenarios, sorted."""
    return sorted(p.stem for p in _corpus_dir().glob("*.yaml"))


def resolve_scenario(ref):
    """Path for a scenario file path or the name of a shipped scenario."""
    p = Path(ref)
    if p.is_file():
        return p
    shipped = _corpus_dir() / f"{ref}.yaml"
    if shipped.is_file():
        return shipped
    raise ValidationError(f"no scenario file or shipped scenario named {ref!r}")
