"""Reading and writing the JSON model format.

Positions are tracked by running the pure-Python JSON scanner with a patched
object parser, so semantic errors can point back at the offending object.
"""

from __future__ import annotations

import json
import json.decoder
import json.scanner
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .model import ModelValidationError, Pomdp, to_raw, validate


@dataclass(frozen=True)
class PositionedError:
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"


class ModelParseError(ValueError):
    def __init__(self, errors: list[PositionedError]):
        self.errors = list(errors)
        super().__init__("\n".join(str(e) for e in self.errors))


class _Obj(dict):
    """A dict remembering where its opening brace was."""

    pos: tuple[int, int] = (1, 1)


def _line_col(text: str, index: int) -> tuple[int, int]:
    line = text.count("\n", 0, index) + 1
    col = index - (text.rfind("\n", 0, index) + 1) + 1
    return line, col


class _DuplicateKey(Exception):
    def __init__(self, key, index):
        self.key = key
        self.index = index


class _PositionDecoder(json.JSONDecoder):
    def __init__(self):
        super().__init__()

        def parse_object(s_and_end, strict, scan_once, object_hook, object_pairs_hook, memo=None):
            s, end = s_and_end
            pairs, new_end = json.decoder.JSONObject(
                s_and_end, strict, scan_once, None, lambda p: p, memo if memo is not None else {}
            )
            obj = _Obj()
            for k, v in pairs:
                if k in obj:
                    raise _DuplicateKey(k, end - 1)
                obj[k] = v
            obj.pos = _line_col(s, end - 1)
            return obj, new_end

        self.parse_object = parse_object
        self.scan_once = json.scanner.py_make_scanner(self)


def _decode(text: str):
    decoder = _PositionDecoder()
    try:
        return decoder.decode(text)
    except _DuplicateKey as exc:
        line, col = _line_col(text, exc.index)
        raise ModelParseError([PositionedError(line, col, f"duplicate key {exc.key!r}")]) from None
    except json.JSONDecodeError as exc:
        raise ModelParseError([PositionedError(exc.lineno, exc.colno, f"syntax error: {exc.msg}")]) from None
    except RecursionError:
        raise ModelParseError([PositionedError(1, 1, "document nested too deeply")]) from None


def _locate(doc: _Obj, location: str) -> tuple[int, int]:
    """Best-effort position of a violation location string."""
    transitions = doc.get("transitions")
    if location.startswith("transitions[") and isinstance(transitions, list):
        try:
            i = int(location[len("transitions["):location.index("]")])
            item = transitions[i]
            if isinstance(item, _Obj):
                return item.pos
        except (ValueError, IndexError):
            pass
    if location.startswith("(") and "," in location and isinstance(transitions, list):
        s, a = location[1:-1].split(",", 1)
        for item in transitions:
            if isinstance(item, _Obj) and item.get("from") == s and item.get("action") == a:
                return item.pos
    key = location.split("[", 1)[0]
    if key in doc:
        value = doc[key]
        if isinstance(value, _Obj):
            return value.pos
    return doc.pos


def parse_model(text: str | bytes) -> Pomdp:
    """Parse and validate a model document.

    Raises :class:`ModelParseError` whose entries carry line and column.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            prefix = bytes(text[: exc.start]).decode("utf-8", errors="replace")
            line, col = _line_col(prefix, len(prefix))
            raise ModelParseError([PositionedError(line, col, "invalid UTF-8")]) from None
    doc = _decode(text)
    if not isinstance(doc, _Obj):
        raise ModelParseError([PositionedError(1, 1, "top level must be an object")])
    if isinstance(doc.get("transitions"), list):
        # duplicate (from, action, to, signal) entries get positioned here
        seen: dict[tuple, int] = {}
        errors = []
        for i, item in enumerate(doc["transitions"]):
            if isinstance(item, _Obj):
                key = tuple(item.get(k) for k in ("from", "action", "to", "signal"))
                if all(isinstance(x, str) for x in key):
                    if key in seen:
                        line, col = item.pos
                        errors.append(PositionedError(
                            line, col,
                            f"duplicate entry for ({','.join(key)}) (first at transitions[{seen[key]}])"))
                    else:
                        seen[key] = i
        if errors:
            raise ModelParseError(errors)
    try:
        return validate(doc)
    except ModelValidationError as exc:
        errors = []
        for v in exc.violations:
            line, col = _locate(doc, v.location)
            errors.append(PositionedError(line, col, str(v)))
        raise ModelParseError(errors) from None


def load_model(path: str | Path) -> Pomdp:
    return parse_model(Path(path).read_bytes())


def _prob_text(p: Fraction) -> str:
    p = Fraction(p)
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def serialize_model(model: Pomdp) -> str:
    """Canonical document: declaration order for lists, sorted object keys,
    probabilities as reduced "p/q" strings."""
    raw = to_raw(model)
    for tr in raw["transitions"]:
        tr["prob"] = _prob_text(tr["prob"])
    raw["initial"] = {s: _prob_text(p) for s, p in raw["initial"].items()}
    return json.dumps(raw, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def save_model(model: Pomdp, path: str | Path) -> None:
    Path(path).write_text(serialize_model(model), encoding="utf-8")
