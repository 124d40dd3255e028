"""Configuration parsing: model defaults < config file < command-line flags.

The config file is flat text, one ``key = value`` per line, ``#`` starts
a comment. Global keys (seed, workers, out, deterministic) may appear in
the file as well; everything else goes to the subcommand's parameter
model, which rejects unknown keys.
"""

from __future__ import annotations

import argparse
import os
from pathlib import Path

from pydantic import BaseModel, ValidationError

from stickyflows.errors import ConfigError
from stickyflows.models.types import PARAM_MODELS, RunConfig

OUT_ENV = "STICKY_FLOWS_OUT"
DEFAULT_OUT = "stickyflows-out"
GLOBAL_KEYS = ("seed", "workers", "out", "deterministic")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

_COMPARISONS = {
    "greater_than_equal": ("≥", "ge"),
    "greater_than": (">", "gt"),
    "less_than_equal": ("≤", "le"),
    "less_than": ("<", "lt"),
}


def read_config_file(path: Path) -> dict[str, str]:
    """Parse ``key = value`` lines.

    Raises:
        ConfigError: On a malformed line or a repeated key.
    """
    values: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{path}:{number}: expected 'key = value'")
        if key in values:
            raise ConfigError(f"{path}:{number}: duplicate key {key}", key=key)
        values[key] = value.strip()
    return values


def _global_options(defaults: bool) -> argparse.ArgumentParser:
    # Suppressed defaults let the options appear before or after the subcommand.
    default = None if defaults else argparse.SUPPRESS
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--seed", type=int, default=default, help="master seed (default 0)")
    parent.add_argument("--workers", type=int, default=default, help="worker processes")
    parent.add_argument(
        "--out", default=default, help=f"output directory (env {OUT_ENV}, default ./{DEFAULT_OUT})"
    )
    parent.add_argument("--config", type=Path, default=default, help="key = value config file")
    parent.add_argument(
        "--deterministic",
        action="store_true",
        default=False if defaults else argparse.SUPPRESS,
        help="strip timestamps from SVG output",
    )
    parent.add_argument(
        "--log-level",
        choices=LOG_LEVELS,
        type=str.upper,
        default="WARNING" if defaults else argparse.SUPPRESS,
    )
    return parent


def _add_model_flags(parser: argparse.ArgumentParser, model: type[BaseModel]) -> None:
    for name, info in model.model_fields.items():
        flag = f"--{name}"
        if info.annotation is bool:
            parser.add_argument(flag, action="store_true", default=argparse.SUPPRESS)
        else:
            parser.add_argument(flag, default=argparse.SUPPRESS, help=info.description)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stickyflows",
        description="Sticky Brownian motion families, prelimit diffusions and flows of kernels",
        parents=[_global_options(defaults=True)],
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, model in PARAM_MODELS.items():
        summary = (model.__doc__ or "").strip().splitlines()
        child = sub.add_parser(
            name,
            parents=[_global_options(defaults=False)],
            help=summary[0] if summary else None,
        )
        _add_model_flags(child, model)
    return parser


def _describe(error: ValidationError) -> ConfigError:
    first = error.errors()[0]
    loc = first.get("loc") or ()
    key = str(loc[0]) if loc else None
    kind = first.get("type", "")
    ctx = first.get("ctx") or {}
    if kind in _COMPARISONS:
        symbol, bound = _COMPARISONS[kind]
        return ConfigError(f"{key} must be {symbol} {ctx[bound]}", key=key)
    if kind == "extra_forbidden":
        return ConfigError(f"unknown key: {key}", key=key)
    if kind == "missing":
        return ConfigError(f"missing required key: {key}", key=key)
    return ConfigError(f"{key}: {first.get('msg', 'invalid value')}", key=key)


def _pop_globals(values: dict, out: dict) -> None:
    for key in GLOBAL_KEYS:
        if key in values:
            out[key] = values.pop(key)


def parse_config(argv: list[str] | None = None, config_file: Path | None = None) -> RunConfig:
    """Resolve argv (and an optional config file) into a validated RunConfig.

    Raises:
        ConfigError: Naming the offending key, e.g. "n must be ≥ 1".
        SystemExit: From argparse on malformed command lines.
    """
    namespace = vars(build_parser().parse_args(argv))
    subcommand = namespace.pop("subcommand")
    namespace.pop("log_level", None)
    file_path = namespace.pop("config", None) or config_file

    settings: dict = {}
    values: dict = read_config_file(file_path) if file_path else {}
    _pop_globals(values, settings)
    flags = {k: v for k, v in namespace.items() if v is not None}
    if not flags.get("deterministic"):
        flags.pop("deterministic", None)
    _pop_globals(flags, settings)
    values.update(flags)

    model = PARAM_MODELS[subcommand]
    try:
        params = model.model_validate(values)
        return RunConfig(
            subcommand=subcommand,
            params=params,
            seed=settings.get("seed", 0),
            workers=settings.get("workers", 1),
            out=str(settings.get("out") or os.environ.get(OUT_ENV) or DEFAULT_OUT),
            deterministic=settings.get("deterministic", False),
        )
    except ValidationError as e:
        raise _describe(e) from None


def log_level(argv: list[str] | None = None) -> str:
    """The --log-level value, read before full validation."""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--log-level", type=str.upper, default="WARNING")
    known, _ = parser.parse_known_args(argv)
    return known.log_level
