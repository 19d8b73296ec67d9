from typing import Any, Callable

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from .imports import ImportedType


class RuntimeSettings(BaseSettings):
    log_level: str = "INFO"
    log_format: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"
    workers: int = Field(1, ge=1)
    json_serializer: ImportedType[Callable[[Any], str]] = Field(
        "mirrorpdmm.utils:json_dumps"
    )
    json_deserializer: ImportedType[Callable[[str], Any]] = Field(
        "mirrorpdmm.utils:json_loads"
    )

    model_config = SettingsConfigDict(
        extra="ignore",
        validate_default=True,
        env_prefix="PDMM_",
    )
