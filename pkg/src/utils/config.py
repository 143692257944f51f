"""Configuration utility module for the application.

This module reads configuration files from the local filesystem (JSON or YAML)
and applies flat ``key=value`` overrides coming from the command line.
"""

import copy
import json
import os
from typing import Any, Dict, Iterable, Optional

import yaml

DEFAULT_APP_CONFIG_PATH = "config/sldg_config.yaml"


def read_config(config_path: str) -> Dict[str, Any]:
    """Read configuration from a local file.

    The file format is detected from the extension (.json, .yaml, .yml).

    Args:
        config_path: Path to the configuration file (e.g., 'config/cases/landau.yaml').

    Returns:
        Dict[str, Any]: The configuration as a dictionary. An empty file yields {}.

    Raises:
        ValueError: If the file extension is not supported.
        FileNotFoundError: If the file does not exist.
        json.JSONDecodeError: If the JSON file is malformed.
        yaml.YAMLError: If the YAML file is malformed.
    """
    if not os.path.exists(config_path):
        raise FileNotFoundError(f"Config file not found: {config_path}")

    _, ext = os.path.splitext(config_path)
    ext = ext.lower()
    if ext not in (".json", ".yaml", ".yml"):
        raise ValueError(f"Unsupported file format: {ext}. Supported formats: .json, .yaml, .yml")

    with open(config_path, "r", encoding="utf-8") as f:
        content = f.read()

    if ext == ".json":
        try:
            return json.loads(content)
        except json.JSONDecodeError as e:
            raise json.JSONDecodeError(f"Invalid JSON in config file: {config_path}", e.doc, e.pos)

    try:
        loaded = yaml.safe_load(content)
    except yaml.YAMLError as e:
        raise yaml.YAMLError(f"Invalid YAML in config file: {config_path}") from e
    return loaded if loaded is not None else {}


def parse_override(item: str) -> tuple:
    """Split one ``key=value`` override into a dotted key and a parsed value.

    Values are parsed as YAML scalars, so ``cfl=2.5`` gives a float, ``qc=true`` a
    bool and ``mesh=[40, 40]`` a list.

    Raises:
        ValueError: If the item has no '=' or an empty key.
    """
    if "=" not in item:
        raise ValueError(f"Override must look like key=value, got: {item!r}")
    key, raw = item.split("=", 1)
    key = key.strip()
    if not key:
        raise ValueError(f"Override has an empty key: {item!r}")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError:
        value = raw
    return key, value


def apply_overrides(config: Dict[str, Any], overrides: Optional[Iterable[str]]) -> Dict[str, Any]:
    """Return a copy of ``config`` with ``key=value`` overrides applied.

    Dotted keys (``sweep.cfls=[5, 10]``) address nested mappings; missing
    intermediate mappings are created.

    Args:
        config: Configuration dictionary (not modified).
        overrides: Iterable of ``key=value`` strings, applied in order.

    Returns:
        Dict[str, Any]: The updated configuration.
    """
    result = copy.deepcopy(config)
    for item in overrides or []:
        key, value = parse_override(item)
        target = result
        parts = key.split(".")
        for part in parts[:-1]:
            nested = target.get(part)
            if not isinstance(nested, dict):
                nested = {}
                target[part] = nested
            target = nested
        target[parts[-1]] = value
    return result


def load_app_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """Load the application defaults.

    The path is taken from the argument, else ``SLDG_CONFIG_PATH``, else
    ``config/sldg_config.yaml``. A missing default file yields {} so the
    library works outside a checkout.
    """
    path = config_path or os.getenv("SLDG_CONFIG_PATH", DEFAULT_APP_CONFIG_PATH)
    if config_path is None and not os.path.exists(path):
        return {}
    return read_config(path)

