import json

import numpy as np
import pytest
from pydantic import TypeAdapter, ValidationError

from mirrorpdmm.imports import import_from_string
from mirrorpdmm.settings import RuntimeSettings
from mirrorpdmm.types import FloatVector
from mirrorpdmm.utils import format_float, json_dumps, json_loads, read_json, write_json


def test_runtime_settings_defaults(monkeypatch):
    monkeypatch.delenv("PDMM_LOG_LEVEL", raising=False)
    monkeypatch.delenv("PDMM_WORKERS", raising=False)
    settings = RuntimeSettings()
    assert settings.log_level == "INFO"
    assert settings.workers == 1
    assert settings.json_serializer is json_dumps
    assert settings.json_deserializer is json_loads


def test_runtime_settings_from_environment(monkeypatch):
    monkeypatch.setenv("PDMM_WORKERS", "3")
    monkeypatch.setenv("PDMM_JSON_SERIALIZER", "json:dumps")
    settings = RuntimeSettings()
    assert settings.workers == 3
    assert settings.json_serializer is json.dumps


def test_runtime_settings_reject_bad_import(monkeypatch):
    monkeypatch.setenv("PDMM_JSON_DESERIALIZER", "json:no_such_function")
    with pytest.raises(ValidationError, match="Invalid python path"):
        RuntimeSettings()


@pytest.mark.parametrize("path", ["json", "json:", "no_such_module_xyz:loads"])
def test_import_from_string_errors(path):
    with pytest.raises(ImportError):
        import_from_string(path)


def test_json_handles_numpy():
    data = {"a": np.arange(3), "b": np.float64(1.5), "c": [np.int64(2)]}
    assert json_loads(json_dumps(data)) == {"a": [0, 1, 2], "b": 1.5, "c": [2]}


def test_json_file_helpers(tmp_path):
    path = write_json(tmp_path / "nested" / "doc.json", {"x": [1.0, 2.0]})
    assert read_json(path) == {"x": [1.0, 2.0]}


def test_format_float():
    assert format_float(0.1) == "0.1"
    assert format_float(1e-6) == "1e-06"
    assert format_float(None) == ""
    assert float(format_float(1 / 3)) == 1 / 3


def test_float_vector_validation():
    adapter = TypeAdapter(FloatVector)
    value = adapter.validate_python([1, 2.5])
    assert value.dtype == np.float64
    assert not value.flags.writeable
    for bad in ["abc", [[1.0]], [1.0, float("nan")]]:
        with pytest.raises(ValidationError):
            adapter.validate_python(bad)


def test_float_vector_serializes_to_lists():
    adapter = TypeAdapter(FloatVector)
    value = adapter.validate_python([1.0, 2.5])
    assert adapter.dump_python(value, mode="json") == [1.0, 2.5]
