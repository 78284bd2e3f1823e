"""Run configuration: TOML file, QKDN_ORR_* environment, command-line flags.

Precedence is flags > environment > file > defaults. A `.env` file in the
working directory is loaded into the environment first.
"""

from __future__ import annotations

import logging
import os
import tomllib
from pathlib import Path
from typing import Any, Mapping

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator

from qkdn_orr.errors import ConfigError
from qkdn_orr.netsim import ChannelConfig, LatencyModel
from qkdn_orr.protocol import Model

ENV_PREFIX = "QKDN_ORR_"
DEFAULT_SIZES = [3, 5, 7, 9, 11]
# spellings that follow the command-line flags
ALIASES = {"kms_http": "kms_url"}


class RunConfig(BaseModel):
    model: str = "all"
    nodes: list[int] = Field(default_factory=lambda: list(DEFAULT_SIZES))
    trials: int = Field(default=1000, ge=1)
    warmup: int = Field(default=10, ge=0)
    seed: int | None = Field(default=None, ge=0)
    latency_us: float = Field(default=0.0, ge=0.0)
    latency_model: LatencyModel = LatencyModel.FIXED
    virtual_clock: bool = False
    orr_qkd_every_hop: bool = True
    out: Path = Path("results.csv")
    raw: Path | None = None
    kms_url: str | None = None
    recv_timeout: float = Field(default=2.0, gt=0.0)
    log_level: str = "INFO"

    @field_validator("model")
    @classmethod
    def _known_model(cls, value: str) -> str:
        value = value.strip().lower()
        if value != "all" and value.upper() not in Model.__members__:
            raise ValueError(f"unknown model {value!r}; expected kr, tn, orr or all")
        return value

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.strip().upper()
        if value not in logging.getLevelNamesMapping():
            raise ValueError(f"unknown log level {value!r}")
        return value

    @field_validator("nodes", mode="before")
    @classmethod
    def _split_nodes(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [int(part) for part in value.split(",") if part.strip()]
        return value

    @property
    def models(self) -> list[Model]:
        if self.model == "all":
            return list(Model)
        return [Model(self.model.upper())]

    def channel_config(self) -> ChannelConfig:
        latency_model = self.latency_model if self.latency_us > 0 else LatencyModel.ZERO
        return ChannelConfig(
            latency_model=latency_model,
            latency_us=self.latency_us,
            virtual_clock=self.virtual_clock,
        )


def _canonical(layer: Mapping[str, Any]) -> dict[str, Any]:
    return {ALIASES.get(key, key): value for key, value in layer.items()}


def _from_env(env: Mapping[str, str]) -> dict[str, str]:
    found = {}
    for name in (*ALIASES, *RunConfig.model_fields):
        value = env.get(ENV_PREFIX + name.upper())
        if value not in (None, ""):
            found[name] = value
    return _canonical(found)


def load_run_config(
    overrides: Mapping[str, Any] | None = None,
    config_path: Path | None = None,
    env: Mapping[str, str] | None = None,
) -> RunConfig:
    """Merge the configuration layers and validate the result."""
    if env is None:
        load_dotenv()
        env = os.environ
    merged: dict[str, Any] = {}
    if config_path is not None:
        try:
            with open(config_path, "rb") as f:
                merged.update(_canonical(tomllib.load(f)))
        except (OSError, tomllib.TOMLDecodeError) as e:
            raise ConfigError(f"cannot read config file {config_path}: {e}") from e
    merged.update(_from_env(env))
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return RunConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigError(str(e)) from e
