"""Flat ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored. Every key must belong to the
schema of the command being run; errors name the file and line.
"""

import os
from dataclasses import dataclass
from pathlib import Path

from evgraph.errors import EvGraphError


class ConfigError(EvGraphError):
    """Unparseable or invalid configuration (CLI exit status 2)."""


_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _to_bool(text):
    low = text.lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _to_int(text):
    return int(text, 10)


def _optional_int(text):
    return None if text.lower() in ("none", "") else int(text, 10)


def _to_list(text):
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _positive(v):
    return v > 0


def _non_negative(v):
    return v >= 0


def _probability(v):
    return 0 <= v <= 1


def _unit_open(v):
    return 0 < v < 1


def _beta(v):
    return 0 <= v < 1


@dataclass(frozen=True)
class Key:
    parse: object
    default: object
    check: object = None
    rule: str = ""
    is_path: bool = False


def _key(parse, default, check=None, rule="", is_path=False):
    return Key(parse, default, check, rule, is_path)


_ADAM = {
    "learning_rate": _key(float, 0.001, _positive, "> 0"),
    "beta1": _key(float, 0.9, _beta, "in [0, 1)"),
    "beta2": _key(float, 0.999, _beta, "in [0, 1)"),
    "epsilon": _key(float, 1e-8, _positive, "> 0"),
    "batch_size": _key(_to_int, 100, _positive, ">= 1"),
}

_COMMON = {
    "master_seed": _key(_to_int, 0, _non_negative, ">= 0"),
    "workers": _key(_to_int, None, _positive, ">= 1"),
}

SCHEMAS = {
    "source-loc": {
        **_COMMON,
        **_ADAM,
        "scale": _key(str, "desk", lambda v: v in ("desk", "full"), "desk or full"),
        "num_nodes": _key(_to_int, 50, _positive, ">= 1"),
        "num_communities": _key(_to_int, 5, _positive, ">= 1"),
        "p_intra": _key(float, 0.8, _probability, "in [0, 1]"),
        "p_inter": _key(float, 0.2, _probability, "in [0, 1]"),
        "num_train": _key(_to_int, None, _positive, ">= 1"),
        "num_test": _key(_to_int, 200, _positive, ">= 1"),
        "max_diffusion_time": _key(_optional_int, None),
        "num_graph_realizations": _key(_to_int, None, _positive, ">= 1"),
        "num_data_realizations": _key(_to_int, None, _positive, ">= 1"),
        "source_policy": _key(str, "uniform", lambda v: v in ("uniform", "max-degree"), "uniform or max-degree"),
        "architectures": _key(_to_list, None),
        "features": _key(_to_int, 16, _positive, ">= 1"),
        "order": _key(_to_int, 4, _positive, ">= 1"),
        "num_knots": _key(_to_int, 5, lambda v: v >= 2, ">= 2"),
        "privileged_size": _key(_to_int, 5, _positive, ">= 1"),
        "epochs": _key(_to_int, 20, _non_negative, ">= 0"),
    },
    "author": {
        **_COMMON,
        **_ADAM,
        "target_author": _key(str, None),
        "split_train": _key(_to_int, 140, _positive, ">= 1"),
        "split_val": _key(_to_int, 20, _non_negative, ">= 0"),
        "split_test": _key(_to_int, 40, _non_negative, ">= 0"),
        "window": _key(_to_int, 10, _positive, ">= 1"),
        "decay": _key(float, 0.8, _unit_open, "in (0, 1)"),
        "normalize": _key(_to_bool, True),
        "function_words": _key(str, None, is_path=True),
        "family": _key(str, "hybrid-ev"),
        "features": _key(_to_int, 2, _positive, ">= 1"),
        "order": _key(_to_int, 1, _positive, ">= 1"),
        "num_knots": _key(_to_int, 2, lambda v: v >= 2, ">= 2"),
        "privileged_size": _key(_to_int, 2, _positive, ">= 1"),
        "strategy": _key(str, "max-degree"),
        "epochs": _key(_to_int, 80, _non_negative, ">= 0"),
    },
    "gradcheck": {
        **_COMMON,
        "tolerance": _key(float, 1e-5, _non_negative, ">= 0"),
        "num_checks": _key(_to_int, 20, _positive, ">= 1"),
    },
    "spectral-response": {
        **_COMMON,
    },
}


def parse_text(text, source="<config>"):
    """``{key: (raw_value, line_number)}`` from ``key = value`` lines."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = (part.strip() for part in body.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: missing key before '='")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first set on line {out[key][1]})")
        out[key] = (value, lineno)
    return out


def resolve(command, raw, source="<config>", base_dir=None):
    """Typed settings for ``command``: defaults overlaid with the raw entries."""
    schema = SCHEMAS[command]
    settings = {k: spec.default for k, spec in schema.items()}
    for key, (value, lineno) in raw.items():
        if key not in schema:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r} for '{command}'")
        spec = schema[key]
        try:
            parsed = spec.parse(value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
        if spec.check is not None and parsed is not None and not spec.check(parsed):
            raise ConfigError(f"{source}:{lineno}: {key} = {value} must be {spec.rule}")
        if spec.is_path and parsed:
            path = Path(parsed)
            if not path.is_absolute() and base_dir is not None:
                path = Path(base_dir) / path
            if not path.exists():
                raise ConfigError(f"{source}:{lineno}: {key} refers to a missing file: {path}")
            parsed = str(path)
        settings[key] = parsed
    if settings.get("workers", 0) is None:
        settings["workers"] = os.cpu_count() or 1
    return settings


def load(command, path=None):
    """Read and resolve a config file (``None`` means all defaults)."""
    if path is None:
        return resolve(command, {})
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        text = path.read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    return resolve(command, parse_text(text, str(path)), str(path), base_dir=path.parent)


def format_settings(settings):
    """Resolved settings as sorted ``key = value`` lines."""
    lines = []
    for key in sorted(settings):
        value = settings[key]
        if isinstance(value, tuple):
            value = ", ".join(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
