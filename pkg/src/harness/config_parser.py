"""
Experiment configuration files.

One ``key = value`` entry per line, ``#`` starts a comment. Structured
values are whitespace-separated ``name=value`` options::

    protocol  = pm
    N         = 3
    n         = 16
    c         = 0.01
    channel   = px=0.01 pz=0.01
    channel.2 = px=0.05              # override for receiver link 2
    adversary = intercept_resend links=2 rate=1.0
    inject    = receiver=1 position=0 pauli=X
    trials    = 200
    seed      = 42

Every key except ``inject`` may appear at most once.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, ValidationError

from src.harness.schemas import ExperimentSpec, GameSettings
from src.protocols.schemas import AdversaryConfig, ChannelConfig, InjectedError, ProtocolConfig
from src.utils import logging
from src.utils.errors import ConfigParseError

# config-file key -> ProtocolConfig field
PROTOCOL_KEYS = {
    "N": "N",
    "n": "n",
    "c": "c",
    "css": "css",
    "catalog": "catalog",
    "codes": "code_file",
    "backend": "backend",
    "reveal_phase": "reveal_phase",
    "extra_permutation": "extra_permutation",
    "key": "fixed_key",
    "m": "raw_positions",
}
# config-file key -> GameSettings field
GAME_KEYS = {
    "questions": "questions",
    "blocks": "blocks",
    "strategy": "strategy",
    "hidden": "hidden",
    "honest_weight": "honest_weight",
    "include_zero": "include_zero",
}
# config-file key -> ExperimentSpec field
SPEC_KEYS = {
    "protocol": "protocol",
    "trials": "trials",
    "seed": "master_seed",
    "output": "output_path",
    "workers": "workers",
}
REPEATABLE_KEYS = {"inject"}
LIST_KEYS = {"catalog"}


def _options(text: str, key: str, line: int) -> dict[str, str]:
    options = {}
    for token in text.split():
        name, sep, value = token.partition("=")
        if not sep or not name or not value:
            raise ConfigParseError(f"expected name=value, got {token!r}", key=key, line=line)
        if name in options:
            raise ConfigParseError(f"option '{name}' given twice", key=key, line=line)
        options[name] = value
    return options


def _validated(model: type[BaseModel], data: dict[str, Any], key: str, line: int) -> BaseModel:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        detail = f"{field}: {first['msg']}" if field else first["msg"]
        raise ConfigParseError(detail, key=key, line=line) from e


def _channel(value: str, key: str, line: int) -> ChannelConfig:
    if value.strip().lower() == "noiseless":
        return ChannelConfig()
    return _validated(ChannelConfig, _options(value, key, line), key, line)


def _adversary(value: str, key: str, line: int) -> AdversaryConfig:
    kind, _, rest = value.strip().partition(" ")
    data: dict[str, Any] = {"kind": kind}
    for name, option in _options(rest, key, line).items():
        data[name] = option.split(",") if name == "links" else option
    return _validated(AdversaryConfig, data, key, line)


def _link_of(key: str, line: int) -> int:
    suffix = key.split(".", 1)[1]
    if not suffix.isdigit():
        raise ConfigParseError(f"link must be a receiver number, got {suffix!r}", key=key, line=line)
    return int(suffix)


def _read_entries(text: str) -> list[tuple[str, str, int]]:
    entries = []
    seen: dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        key, sep, value = content.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigParseError(f"expected 'key = value', got {content!r}", line=number)
        if not value:
            raise ConfigParseError("missing value", key=key, line=number)
        if key in seen and key not in REPEATABLE_KEYS:
            raise ConfigParseError(f"duplicate key (first set on line {seen[key]})", key=key, line=number)
        seen.setdefault(key, number)
        entries.append((key, value, number))
    return entries


def parse_config(text: str) -> ExperimentSpec:
    """
    Parse and validate an experiment configuration.

    Defaults: c = 0.01, css = steane, noiseless channel, no adversary,
    backend auto.

    Raises:
        ConfigParseError: On unknown keys, duplicates, malformed or
            out-of-range values, or a missing ``protocol``
    """
    protocol_fields: dict[str, Any] = {}
    game_fields: dict[str, Any] = {}
    spec_fields: dict[str, Any] = {}
    link_channels: dict[int, ChannelConfig] = {}
    injected: list[InjectedError] = []
    lines: dict[str, int] = {}

    for key, value, line in _read_entries(text):
        lines.setdefault(key, line)
        if key in PROTOCOL_KEYS:
            field = PROTOCOL_KEYS[key]
            protocol_fields[field] = [v.strip() for v in value.split(",")] if key in LIST_KEYS else value
        elif key in GAME_KEYS:
            game_fields[GAME_KEYS[key]] = value
        elif key in SPEC_KEYS:
            spec_fields[SPEC_KEYS[key]] = value
        elif key == "channel":
            protocol_fields["channel"] = _channel(value, key, line)
        elif key.startswith("channel."):
            link_channels[_link_of(key, line)] = _channel(value, key, line)
        elif key == "adversary":
            protocol_fields["adversary"] = _adversary(value, key, line)
        elif key == "inject":
            injected.append(_validated(InjectedError, _options(value, key, line), key, line))
        else:
            raise ConfigParseError("unknown key", key=key, line=line)

    if "protocol" not in spec_fields:
        raise ConfigParseError("missing required key", key="protocol")

    protocol_fields["link_channels"] = link_channels
    protocol_fields["injected_errors"] = injected
    config = _validated_section(ProtocolConfig, protocol_fields, PROTOCOL_KEYS, lines, "N")
    game = _validated_section(GameSettings, game_fields, GAME_KEYS, lines, "questions")
    spec = _validated_section(
        ExperimentSpec, {**spec_fields, "config": config, "game": game}, SPEC_KEYS, lines, "protocol"
    )
    logging.debug(f"Parsed experiment spec: protocol={spec.protocol}, trials={spec.trials}")
    return spec


def _validated_section(model: type[BaseModel], data: dict[str, Any], keys: dict[str, str],
                       lines: dict[str, int], fallback: str) -> Any:
    """Validate a model and name the offending config key and its line."""
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = str(first["loc"][0]) if first["loc"] else None
        by_field = {v: k for k, v in keys.items()}
        by_field.update({"channel": "channel", "link_channels": "channel", "adversary": "adversary",
                         "injected_errors": "inject"})
        key = by_field.get(field, fallback) if field else fallback
        raise ConfigParseError(first["msg"], key=key, line=lines.get(key)) from e


def load_config(path: str | Path) -> ExperimentSpec:
    """
    Read and parse a configuration file.

    Raises:
        FileNotFoundError: If the file does not exist
        ConfigParseError: If the content is invalid
    """
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"Config file not found: {file_path}")
    try:
        return parse_config(file_path.read_text())
    except ConfigParseError as e:
        logging.error(f"Invalid config {file_path}: {e}")
        raise


def apply_overrides(spec: ExperimentSpec, master_seed: Optional[int] = None,
                    trials: Optional[int] = None, output_path: Optional[str] = None,
                    workers: Optional[int] = None) -> ExperimentSpec:
    updates: dict[str, Any] = {}
    if master_seed is not None:
        updates["master_seed"] = master_seed
    if trials is not None:
        updates["trials"] = trials
    if output_path is not None:
        updates["output_path"] = output_path
    if workers is not None:
        updates["workers"] = workers
    if not updates:
        return spec
    return ExperimentSpec.model_validate({**spec.model_dump(), **updates})
