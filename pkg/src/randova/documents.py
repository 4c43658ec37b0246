"""JSON document formats: potential-outcome tables in, reports out.

Table document (one-based semantics, positional arrays):

    {
      "design": "rcb" | "ls",
      "treatments": T,
      "blocks": N,                 # rcb only
      "outcomes": [[[...]]],       # [block/row][plot/column][treatment]
      "technical_error_sd": 0.0,   # optional, default 0
      "name": "table1"             # optional
    }

Malformed documents raise ParseError with a diagnostic naming the offending
field (blocks/plots/columns reported one-based).  Reports are emitted with
every float at 17 significant digits so they round-trip losslessly; an
infinite F serializes as "inf" and a degenerate (0/0) F as "degenerate".
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ParseError
from .potential_outcomes import DesignKind, PotentialOutcomeTable, validate

_FLOAT_FORMAT = ".17g"


def load_table(source: str | Path | dict) -> PotentialOutcomeTable:
    """Read and validate a table document from a path or parsed dict."""
    if isinstance(source, dict):
        doc = source
    else:
        path = Path(source)
        try:
            with path.open("r", encoding="utf-8") as handle:
                doc = json.load(handle)
        except OSError as exc:
            raise ParseError(f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("table document must be a JSON object")
    return table_from_document(doc)


def _require(doc: dict, field: str, kind: type, optional: bool = False) -> Any:
    if field not in doc:
        if optional:
            return None
        raise ParseError(f"{field}: required field is missing")
    value = doc[field]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"{field}: expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(f"{field}: expected an integer, got {value!r}")
        return value
    if not isinstance(value, kind):
        raise ParseError(f"{field}: expected {kind.__name__}, got {value!r}")
    return value


def table_from_document(doc: dict) -> PotentialOutcomeTable:
    design_raw = _require(doc, "design", str)
    try:
        design = DesignKind(design_raw)
    except ValueError:
        raise ParseError(f'design: must be "rcb" or "ls", got {design_raw!r}') from None

    treatments = _require(doc, "treatments", int)
    if treatments < 2:
        raise ParseError(f"treatments: must be >= 2, got {treatments}")
    if design is DesignKind.RCB:
        blocks = _require(doc, "blocks", int)
        if blocks < 1:
            raise ParseError(f"blocks: must be >= 1, got {blocks}")
    else:
        if "blocks" in doc and doc["blocks"] != treatments:
            raise ParseError(
                f"blocks: a LS has no separate block count (got {doc['blocks']})"
            )
        blocks = treatments

    outcomes = _require(doc, "outcomes", list)
    if len(outcomes) != blocks:
        label = "blocks" if design is DesignKind.RCB else "rows"
        raise ParseError(f"outcomes: expected {blocks} {label}, got {len(outcomes)}")
    parsed = []
    for i, row in enumerate(outcomes):
        if not isinstance(row, list) or len(row) != treatments:
            raise ParseError(
                f"outcomes, block/row {i + 1}: expected {treatments} "
                f"plots/columns, got {row!r}"
            )
        parsed_row = []
        for j, cell in enumerate(row):
            if not isinstance(cell, list) or len(cell) != treatments:
                raise ParseError(
                    f"outcomes, block/row {i + 1}, plot/column {j + 1}: expected "
                    f"{treatments} potential outcomes, got {cell!r}"
                )
            values = []
            for k, value in enumerate(cell):
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ParseError(
                        f"outcomes, block/row {i + 1}, plot/column {j + 1}, "
                        f"treatment {k + 1}: expected a number, got {value!r}"
                    )
                if not math.isfinite(value):
                    raise ParseError(
                        f"outcomes, block/row {i + 1}, plot/column {j + 1}, "
                        f"treatment {k + 1}: value must be finite"
                    )
                values.append(float(value))
            parsed_row.append(values)
        parsed.append(parsed_row)

    sd = _require(doc, "technical_error_sd", float, optional=True)
    if sd is None:
        sd = 0.0
    if sd < 0:
        raise ParseError(f"technical_error_sd: must be >= 0, got {sd}")
    name = _require(doc, "name", str, optional=True)

    table = PotentialOutcomeTable(
        design=design,
        outcomes=np.array(parsed, dtype=float),
        technical_error_sd=sd,
        name=name,
    )
    return validate(table)


def table_to_document(table: PotentialOutcomeTable) -> dict:
    """Inverse of table_from_document (round-trips to an equal document)."""
    doc: dict[str, Any] = {"design": table.design.value}
    doc["treatments"] = table.num_treatments
    if table.design is DesignKind.RCB:
        doc["blocks"] = table.num_blocks
    doc["outcomes"] = table.outcomes.tolist()
    doc["technical_error_sd"] = table.technical_error_sd
    if table.name is not None:
        doc["name"] = table.name
    return doc


def _encode(value: Any, out: list[str], indent: int, level: int) -> None:
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        out.append(str(int(value)))
    elif isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            out.append('"degenerate"')
        elif math.isinf(value):
            out.append('"inf"' if value > 0 else '"-inf"')
        else:
            out.append(format(value, _FLOAT_FORMAT))
    elif isinstance(value, str):
        out.append(json.dumps(value))
    elif isinstance(value, np.ndarray):
        _encode(value.tolist(), out, indent, level)
    elif isinstance(value, (list, tuple)):
        if not value:
            out.append("[]")
            return
        out.append("[\n")
        for idx, item in enumerate(value):
            out.append(pad_in)
            _encode(item, out, indent, level + 1)
            out.append(",\n" if idx + 1 < len(value) else "\n")
        out.append(pad + "]")
    elif isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        out.append("{\n")
        items = list(value.items())
        for idx, (key, item) in enumerate(items):
            out.append(pad_in + json.dumps(str(key)) + ": ")
            _encode(item, out, indent, level + 1)
            out.append(",\n" if idx + 1 < len(items) else "\n")
        out.append(pad + "}")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__} to a report")


def dumps_report(document: dict, indent: int = 2) -> str:
    """Serialize a report document; floats carry 17 significant digits."""
    out: list[str] = []
    _encode(document, out, indent, 0)
    return "".join(out)


def report_document(
    operation: str,
    inputs: dict,
    payload: dict,
    seed: int | None = None,
) -> dict:
    """Assemble the common report envelope around an operation's outputs."""
    from . import __version__

    doc: dict[str, Any] = {
        "operation": operation,
        "engine_version": __version__,
        "inputs": inputs,
    }
    doc.update(payload)
    if seed is not None:
        doc["seed"] = seed
    return doc
