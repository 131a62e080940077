"""JSON reports, CSV tables and sparse operator dumps."""
import csv
import io
import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO, Tuple

import numpy as np

logger = logging.getLogger(__name__)


@dataclass
class Table:
    """Named CSV table; two-column tables are plot data."""

    columns: Tuple[str, ...]
    rows: List[Sequence] = field(default_factory=list)


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays, tuples and non-string keys into plain JSON values."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dumps_json(data: Dict) -> str:
    """Canonical JSON: sorted keys, fixed indentation, shortest float repr."""
    return json.dumps(to_jsonable(data), sort_keys=True, indent=2, ensure_ascii=False) + '\n'


def _format_cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_rows(columns: Sequence[str], rows: Iterable[Sequence], stream: TextIO, flush: bool = False) -> int:
    """Write a CSV header and rows as they arrive; returns the row count."""
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(columns)
    count = 0
    for row in rows:
        writer.writerow([_format_cell(x) for x in row])
        count += 1
        if flush:
            stream.flush()
    return count


def write_table(table: Table, stream: TextIO) -> None:
    write_rows(table.columns, table.rows, stream)


def stream_rows(columns: Sequence[str], rows: Iterable[Sequence], out_path: Optional[str],
                stream: TextIO) -> int:
    """write_rows to out_path, or to stream when no path is given, flushing after each row."""
    if not out_path:
        return write_rows(columns, rows, stream, flush=True)
    _ensure_directory(out_path)
    with open(out_path, 'w', newline='', encoding='utf-8') as f:
        count = write_rows(columns, rows, f, flush=True)
    logger.info(f"Streamed {count} rows to {out_path}")
    return count


def dumps_tables(tables: Dict[str, Table]) -> str:
    """All tables in one text, each preceded by a '# name' line."""
    buffer = io.StringIO()
    for number, name in enumerate(sorted(tables)):
        if number:
            buffer.write('\n')
        buffer.write(f"# {name}\n")
        write_table(tables[name], buffer)
    return buffer.getvalue()


def table_path(out_path: str, name: str) -> str:
    stem, _ = os.path.splitext(out_path)
    return f"{stem}.{name}.csv"


def write_tables(tables: Dict[str, Table], out_path: str) -> List[str]:
    """Write each table to <stem>.<name>.csv next to out_path; returns the written paths."""
    written = []
    for name in sorted(tables):
        path = table_path(out_path, name)
        _ensure_directory(path)
        with open(path, 'w', newline='', encoding='utf-8') as f:
            write_table(tables[name], f)
        written.append(path)
    logger.info(f"Wrote {len(written)} CSV tables next to {out_path}")
    return written


def write_text(text: str, out_path: Optional[str], stream: TextIO) -> None:
    if not out_path:
        stream.write(text)
        return
    _ensure_directory(out_path)
    with open(out_path, 'w', encoding='utf-8') as f:
        f.write(text)
    logger.info(f"Wrote {out_path}")


def dumps_operator(header: Dict, triplets: Sequence[Tuple[int, int, float]]) -> str:
    """
    Sparse operator text.

    The first line is '# ' followed by the JSON header on one line, the
    second names the columns, then one 'row col value' line per stored entry.
    """
    lines = ['# ' + json.dumps(to_jsonable(header), sort_keys=True), '# row col value']
    lines.extend(f"{row} {col} {value!r}" for row, col, value in triplets)
    return '\n'.join(lines) + '\n'


def write_operator(operator, path: str) -> None:
    """Dump an OperatorMatrix as triplet text with its header."""
    _ensure_directory(path)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(dumps_operator(operator.header(), operator.to_triplets()))
    logger.info(f"Wrote operator {operator.label!r} ({operator.matrix.nnz} entries) to {path}")


def write_operators(operators: Dict[str, Any], directory: str) -> List[str]:
    """Dump every operator to <directory>/<name>.txt; returns the written paths."""
    written = []
    for name in sorted(operators):
        path = os.path.join(directory, f"{name}.txt")
        write_operator(operators[name], path)
        written.append(path)
    return written


def read_operator(path: str) -> Tuple[Dict, List[Tuple[int, int, float]]]:
    with open(path, 'r', encoding='utf-8') as f:
        header = json.loads(f.readline()[2:])
        triplets = []
        for line in f:
            if line.startswith('#') or not line.strip():
                continue
            row, col, value = line.split()
            triplets.append((int(row), int(col), float(value)))
    return header, triplets


def _ensure_directory(path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
