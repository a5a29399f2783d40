"""The JSON report schema shared by every command."""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import jsonschema


@lru_cache(maxsize=1)
def load_schema() -> dict:
    return json.loads(resources.files("qdivisor").joinpath("report_schema.json").read_text())


def validate_records(records: list, schema: dict | None = None) -> list:
    """Return a list of human-readable schema violations (empty when valid)."""
    validator = jsonschema.Draft202012Validator(schema or load_schema())
    return [f"{'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}"
            for e in validator.iter_errors(records)]
