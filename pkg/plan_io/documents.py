import json
import logging

from typing import Any, TypeVar

from pydantic import BaseModel, ValidationError


logger = logging.getLogger(__name__)

M = TypeVar('M', bound=BaseModel)


class DocumentError(ValueError):
    """A configuration document that cannot be read or does not fit its schema."""

    def __init__(self, message: str, *, source: str, path: str | None = None, line: int | None = None):
        self.source = source
        self.path = path
        self.line = line
        where = source if line is None else f'{source}:{line}'
        if path:
            where = f'{where} ({path})'
        super().__init__(f'{where}: {message}')


def decode(data: bytes | str, source: str, error: type[DocumentError]) -> str:
    if isinstance(data, str):
        return data
    try:
        return data.decode('utf-8')
    except UnicodeDecodeError as e:
        raise error(f'not UTF-8 ({e.reason} at byte {e.start})', source=source) from e


def load_json(text: str, source: str, error: type[DocumentError]) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise error(f'{e.msg} (column {e.colno})', source=source, line=e.lineno) from e


def line_of(text: str, location: tuple[str | int, ...]) -> int | None:
    """Best-effort line of the key at `location` in a JSON document."""
    position = 0
    found = False
    for key in location:
        if isinstance(key, int):
            continue
        at = text.find(f'"{key}"', position)
        if at < 0:
            break
        position, found = at, True
    return text.count('\n', 0, position) + 1 if found else None


def validate_document(model: type[M], payload: Any, text: str, source: str, error: type[DocumentError]) -> M:
    try:
        return model.model_validate(payload)
    except ValidationError as e:
        first = e.errors()[0]
        location = tuple(first['loc'])
        path = '.'.join(str(part) for part in location)
        logger.debug('%s has %d schema errors', source, e.error_count())
        raise error(first['msg'], source=source, path=path or None, line=line_of(text, location)) from e
