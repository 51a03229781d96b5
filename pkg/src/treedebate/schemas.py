"""Parsing and validation of structured model replies.

A reply is expected to carry one JSON value, either inside a fenced code
block or as the first balanced object/array in the text. Concrete schemas
(claims, subtopics, verdicts) live next to the types they produce and
register themselves here so the gateway can insist on validated output.
"""

from __future__ import annotations

import json
import re
from typing import Any, ClassVar


class SchemaError(ValueError):
    """The reply text does not satisfy the expected schema."""


SCHEMA_REGISTRY: dict[str, type["ReplySchema"]] = {}


class ReplySchema:
    """Base class: subclasses set `schema_id` and implement `validate`."""

    schema_id: ClassVar[str]

    def __init_subclass__(cls, **kwargs: Any) -> None:
        super().__init_subclass__(**kwargs)
        SCHEMA_REGISTRY[cls.schema_id] = cls

    def validate(self, payload: Any) -> Any:
        raise NotImplementedError

    def parse(self, raw_text: str) -> Any:
        return self.validate(extract_json(raw_text))


_FENCE = re.compile(r"```[a-zA-Z0-9_-]*\s*\n(.*?)```", re.DOTALL)


def extract_json(raw_text: str) -> Any:
    """Pull the single JSON value out of a model reply."""
    fenced = _FENCE.search(raw_text)
    candidate = fenced.group(1) if fenced else raw_text
    candidate = candidate.strip()
    try:
        return json.loads(candidate)
    except json.JSONDecodeError:
        pass
    span = _balanced_span(candidate)
    if span is None:
        raise SchemaError("reply contains no JSON object or array")
    try:
        return json.loads(span)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"reply JSON is malformed: {exc}") from exc


def _balanced_span(text: str) -> str | None:
    start = None
    for i, ch in enumerate(text):
        if ch in "{[":
            start = i
            break
    if start is None:
        return None
    opener = text[start]
    closer = "}" if opener == "{" else "]"
    depth = 0
    in_string = False
    escape = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == opener:
            depth += 1
        elif ch == closer:
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    return None


def require_str(obj: dict, key: str, where: str) -> str:
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, str):
        raise SchemaError(f"{where}: field {key!r} must be a string")
    return value


def require_bool(obj: dict, key: str, where: str) -> bool:
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    return coerce_bool(obj[key], f"{where}.{key}")


def coerce_bool(value: Any, where: str) -> bool:
    """Accept booleans plus the "True"/"False" strings the prompts request."""
    if isinstance(value, bool):
        return value
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered == "true":
            return True
        if lowered == "false":
            return False
    raise SchemaError(f"{where}: expected a boolean, got {value!r}")


def coerce_yes_no(value: Any, where: str) -> bool:
    """Accept "Yes"/"No" (and plain booleans) for the relevance fields."""
    if isinstance(value, bool):
        return value
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered == "yes":
            return True
        if lowered == "no":
            return False
    raise SchemaError(f"{where}: expected \"Yes\" or \"No\", got {value!r}")


def require_int_list(obj: dict, key: str, where: str) -> list[int]:
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, list) or any(
        not isinstance(v, int) or isinstance(v, bool) for v in value
    ):
        raise SchemaError(f"{where}: field {key!r} must be a list of integers")
    return value
