from __future__ import annotations

from pathlib import Path
from typing import Any, Callable

import numpy as np
from pydantic_core import to_jsonable_python


def _default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return to_jsonable_python(value)


try:
    import orjson

    def json_dumps(data: Any) -> str:
        return orjson.dumps(
            data, default=_default, option=orjson.OPT_SERIALIZE_NUMPY
        ).decode("utf-8")

    def json_loads(data: str | bytes) -> Any:
        return orjson.loads(data)

except ImportError:
    import json

    def json_dumps(data: Any) -> str:
        return json.dumps(data, default=_default)

    def json_loads(data: str | bytes) -> Any:
        return json.loads(data)


def write_json(
    path: str | Path, data: Any, dumps: Callable[[Any], str] | None = None
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text((dumps or json_dumps)(data), encoding="utf-8")
    return path


def read_json(
    path: str | Path, loads: Callable[[str], Any] | None = None
) -> Any:
    return (loads or json_loads)(Path(path).read_text(encoding="utf-8"))


def format_float(value: float | None) -> str:
    """Shortest string that parses back to the same double; empty for ``None``."""
    if value is None:
        return ""
    return repr(float(value))
