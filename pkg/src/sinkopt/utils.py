"""Utility & helper functions."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

SCHEMA = "sinkopt/1"


def resolve_threads(threads: int) -> int:
    """Map the ``threads`` setting to a worker count (0 means one per CPU)."""
    if threads < 0:
        raise ValueError("threads must be non-negative")
    return threads or (os.cpu_count() or 1)


def parallel_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> List[R]:
    """Apply ``fn`` to every item, returning results in input order.

    Results never depend on the worker count; only the wall-clock time does.
    """
    workers = resolve_threads(threads)
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def parse_labels(text: str) -> List[int]:
    """Parse a comma-separated list of node labels such as ``"1,2,5"``."""
    labels = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if not token.isdigit():
            raise ValueError(f"invalid node label {token!r}")
        labels.append(int(token))
    return labels


def round_sig(value: Optional[float], digits: int = 12) -> Optional[float]:
    """Round to ``digits`` significant digits; non-finite values become None."""
    if value is None or not math.isfinite(value):
        return None
    return float(f"{value:.{digits}g}")


def _normalise(payload: Any) -> Any:
    if isinstance(payload, bool) or payload is None or isinstance(payload, (int, str)):
        return payload
    if isinstance(payload, float):
        return round_sig(payload)
    if isinstance(payload, dict):
        return {str(k): _normalise(v) for k, v in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [_normalise(v) for v in payload]
    if hasattr(payload, "item"):
        return _normalise(payload.item())
    raise TypeError(f"cannot serialise {type(payload).__name__}")


def to_json(command: str, body: Dict[str, Any]) -> str:
    """Render a versioned report with fixed key order and 12 significant digits."""
    document = {"schema": SCHEMA, "command": command, **body}
    return json.dumps(_normalise(document), ensure_ascii=False, indent=2) + "\n"


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Render flat rows as CSV text."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_normalise(v) if isinstance(v, float) else v for v in row])
    return buffer.getvalue()
