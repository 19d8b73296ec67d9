from __future__ import annotations

import importlib
from typing import TYPE_CHECKING, Annotated, Any, TypeVar

from pydantic import GetCoreSchemaHandler
from pydantic_core import PydanticCustomError, core_schema

AnyType = TypeVar("AnyType")


def import_from_string(path: str) -> Any:
    """Resolve ``"package.module:attribute"`` to the attribute."""
    module_name, sep, attr = path.partition(":")
    if not sep or not attr:
        raise ImportError(f"{path!r} is not of the form 'module:attribute'")
    module = importlib.import_module(module_name)
    try:
        return getattr(module, attr)
    except AttributeError:
        raise ImportError(f"{module_name} has no object {attr}") from None


def _resolve(value: Any) -> Any:
    if not isinstance(value, str):
        return value
    try:
        return import_from_string(value)
    except ImportError as e:
        raise PydanticCustomError(
            "import_error", "Invalid python path: {error}", {"error": str(e)}
        ) from None


def _import_path(value: Any) -> Any:
    return f"{value.__module__}:{value.__name__}"


if TYPE_CHECKING:
    ImportedType = Annotated[AnyType, ...]
else:

    class ImportedType:
        """Callable config field given as ``"module:attr"``; dumps back to the path."""

        @classmethod
        def __class_getitem__(cls, item: AnyType) -> AnyType:
            return Annotated[item, cls()]

        @classmethod
        def __get_pydantic_core_schema__(
            cls, source: type[Any], handler: GetCoreSchemaHandler
        ) -> core_schema.CoreSchema:
            return core_schema.no_info_before_validator_function(
                function=_resolve,
                schema=handler(source),
                serialization=core_schema.plain_serializer_function_ser_schema(
                    _import_path, when_used="json"
                ),
            )
