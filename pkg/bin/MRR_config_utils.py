#!/usr/bin/env python3
# ## @DOC
# ### MRR Config Utils
# Query config.toml and the bundled presets



"""
Configuration utility for the MRR accelerator simulator.

Parses the project `config.toml` and the TOML/JSON override files the CLI
accepts (`--params`, `--peripherals`, arch configs), and lets shell scripts
query values such as the sweep axes or the reference organization.
"""

import argparse
import json
import os
import sys
from pathlib import Path

# Try importing tomllib (Python 3.11+) or tomli
try:
    import tomllib as toml
except ImportError:
    try:
        import tomli as toml
    except ImportError:
        print("Error: 'tomli' (or python 3.11+) is required.", file=sys.stderr)
        sys.exit(1)

sys.path.append(str(Path(__file__).parent))
from MRR_errors import ConfigError, IoError  # noqa: E402

ROOT_DIR = Path(__file__).resolve().parent.parent
PRESETS_DIR = ROOT_DIR / "config" / "presets"
ARCH_DIR = ROOT_DIR / "config" / "arch"
WORKLOADS_DIR = ROOT_DIR / "config" / "workloads"
ENV_VAR = "MRRSIM_CONFIG"


def find_config(root_dir):
    # Priority 1: explicit override through the environment
    env_path = os.environ.get(ENV_VAR)
    if env_path:
        return Path(env_path)
    # Priority 2: project root
    if (root_dir / "config.toml").exists():
        return root_dir / "config.toml"
    # Priority 3: per-user overlay directory
    if (root_dir / ".mrrsim" / "config.toml").exists():
        return root_dir / ".mrrsim" / "config.toml"
    return None


def load_config(root_dir=ROOT_DIR):
    config_path = find_config(Path(root_dir))
    if config_path is None:
        return {}
    if not config_path.exists():
        raise IoError(f"config file not found: {config_path}", path=config_path)

    try:
        with open(config_path, "rb") as f:
            return toml.load(f)
    except toml.TOMLDecodeError as e:
        raise ConfigError(f"cannot parse {config_path}: {e}", path=config_path) from e


def load_document(path):
    """Load a TOML or JSON mapping, chosen by file suffix."""
    path = Path(path)
    if not path.exists():
        raise IoError(f"file not found: {path}", path=path)
    try:
        if path.suffix == ".json":
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        else:
            with open(path, "rb") as f:
                data = toml.load(f)
    except (json.JSONDecodeError, toml.TOMLDecodeError) as e:
        raise ConfigError(f"cannot parse {path}: {e}", path=path) from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a mapping at top level", path=path)
    return data


def load_preset(name):
    return load_document(PRESETS_DIR / f"{name}.toml")


def get_value(config, path):
    """Retrieve a value from the config dict based on dot-notation path."""
    keys = path.split(".")
    curr = config
    for key in keys:
        if isinstance(curr, dict) and key in curr:
            curr = curr[key]
        else:
            return None
    return curr


def get_or_default(config, path, default):
    value = get_value(config, path)
    return default if value is None else value


def main():
    parser = argparse.ArgumentParser(description="Query config.toml")
    subparsers = parser.add_subparsers(dest="command")

    # Command: get <path>
    get_parser = subparsers.add_parser("get", help="Get a specific value")
    get_parser.add_argument(
        "path", help="Dot-notation path (e.g. simulation.bit_rates)"
    )

    # Command: presets
    subparsers.add_parser("presets", help="List bundled preset files")

    args = parser.parse_args()

    if args.command == "get":
        val = get_value(load_config(ROOT_DIR), args.path)
        if val is None:
            sys.exit(1)

        # Output suitable for bash
        if isinstance(val, bool):
            print("true" if val else "false")
        elif isinstance(val, list):
            print(" ".join(str(v) for v in val))
        else:
            print(val)

    elif args.command == "presets":
        for preset in sorted(PRESETS_DIR.glob("*.toml")):
            print(preset.stem)


if __name__ == "__main__":
    main()
