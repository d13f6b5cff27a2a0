"""
Deterministic JSON bytes for every artifact the pipeline writes
"""

from pathlib import Path
from typing import Any, Union

import orjson

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY
JSONL_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY


def dump_json(data: Any) -> bytes:
    return orjson.dumps(data, option=JSON_OPTIONS) + b"\n"


def dump_jsonl_line(data: Any) -> bytes:
    return orjson.dumps(data, option=JSONL_OPTIONS) + b"\n"


def write_json(data: Any, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dump_json(data))
    return path


def read_json(path: Union[str, Path]) -> Any:
    return orjson.loads(Path(path).read_bytes())
