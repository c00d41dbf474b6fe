"""Built-in system-definition files."""

from importlib import resources
from pathlib import Path

from ..parser import parse_system

BUILTIN = ("hinged-rod", "central-force", "harmonic-oscillator", "free-particle")


def builtin_text(name):
    if name not in BUILTIN:
        raise KeyError(f"no built-in system named {name!r}; known: {', '.join(BUILTIN)}")
    return resources.files(__name__).joinpath(f"{name}.sys").read_text()


def load_builtin(name):
    return parse_system(builtin_text(name))


def resolve_system(name_or_path):
    """A built-in name (with or without ``.sys``) or a path to a system file."""
    stem = name_or_path[:-4] if name_or_path.endswith(".sys") else name_or_path
    path = Path(name_or_path)
    if path.is_file():
        return parse_system(path.read_text())
    if stem in BUILTIN:
        return load_builtin(stem)
    raise FileNotFoundError(f"{name_or_path!r} is neither a file nor a built-in system ({', '.join(BUILTIN)})")
