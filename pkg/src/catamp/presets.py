"""Scenario presets and the flat key-value config format.

Config files are UTF-8 text, one ``dotted.key = value`` pair per line;
``#`` starts a comment.  Presets are config files shipped with the package,
one per reproduction scenario, so a scenario run is just ``--preset NAME``.
"""

from __future__ import annotations

from importlib import resources

from .fock import ConfigurationError

_PRESET_PACKAGE = "catamp.presets_data"


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse flat ``key = value`` lines into an ordered dict of strings."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(
                f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}"
            )
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigurationError(f"{source}:{lineno}: empty key or value")
        if key in out:
            raise ConfigurationError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def list_presets() -> list[str]:
    names = []
    for entry in resources.files(_PRESET_PACKAGE).iterdir():
        if entry.name.endswith(".cfg"):
            names.append(entry.name[: -len(".cfg")])
    return sorted(names)


def load_preset(name: str) -> dict:
    path = resources.files(_PRESET_PACKAGE) / f"{name}.cfg"
    if not path.is_file():
        raise ConfigurationError(
            f"unknown preset {name!r}; available: {', '.join(list_presets())}"
        )
    return parse_config_text(path.read_text(encoding="utf-8"), source=f"preset {name}")
