"""Flat key/value config files.

One `key = value` per line, `#` comments, dotted keys group into sections
(mapping.*, link.*, quad.*, ctrl.*, session.*). Values parse as bool, int,
float, comma-separated number lists, or fall back to strings. Schema in
docs/formats.md.
"""

from __future__ import annotations

from pathlib import Path

CONFIG_FORMAT = 1


def _parse_scalar(text: str):
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_value(text: str):
    text = text.strip()
    if "," in text:
        return [_parse_scalar(part.strip()) for part in text.split(",")]
    return _parse_scalar(text)


def load_config(path: str | Path) -> dict:
    """Read a config file into a flat {dotted_key: value} dict."""
    out: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            if not key:
                raise ValueError(f"{path}:{lineno}: empty key")
            out[key] = parse_value(value)
    fmt = out.get("format", CONFIG_FORMAT)
    if fmt != CONFIG_FORMAT:
        raise ValueError(f"unsupported config format {fmt!r}")
    return out


def section(config: dict, prefix: str) -> dict:
    """Extract keys under `prefix.` with the prefix stripped."""
    dot = prefix + "."
    return {k[len(dot):]: v for k, v in config.items() if k.startswith(dot)}
