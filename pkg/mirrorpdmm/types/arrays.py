from __future__ import annotations

from typing import TYPE_CHECKING, Annotated, Any

import numpy as np
from pydantic import GetCoreSchemaHandler
from pydantic_core import PydanticCustomError, core_schema


def to_float_array(value: Any, ndim: int) -> np.ndarray:
    try:
        array = np.array(value, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise PydanticCustomError(
            "array_type", "Expected numeric array: {error}", {"error": str(e)}
        ) from None
    if array.ndim != ndim:
        raise PydanticCustomError(
            "array_ndim",
            "Expected {expected}-dimensional array, got {actual}",
            {"expected": ndim, "actual": array.ndim},
        )
    if not np.all(np.isfinite(array)):
        raise PydanticCustomError("array_finite", "Array entries must be finite")
    array.setflags(write=False)
    return array


def array_to_list(value: np.ndarray) -> list:
    return np.asarray(value, dtype=np.float64).tolist()


class _FloatArray:
    @classmethod
    def __get_pydantic_core_schema__(
        cls, source: type[Any], handler: GetCoreSchemaHandler
    ) -> core_schema.CoreSchema:
        return core_schema.no_info_plain_validator_function(
            function=lambda value: to_float_array(value, 1),
            serialization=core_schema.plain_serializer_function_ser_schema(
                array_to_list, when_used="json"
            ),
        )


if TYPE_CHECKING:
    FloatVector = Annotated[np.ndarray, ...]
else:
    FloatVector = Annotated[np.ndarray, _FloatArray()]
