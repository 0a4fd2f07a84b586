"""CSV/JSON table output with a reproducibility header."""

import csv
import hashlib
import io
import json
import math
from pathlib import Path


def format_value(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float) or hasattr(v, "dtype"):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def _json_value(v):
    if v is None or isinstance(v, (bool, str, int)):
        return v
    v = float(v)
    if math.isfinite(v):
        return v
    return str(v)


def config_hash(config):
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def render_csv(rows, columns, meta=None):
    """CSV text: '#'-prefixed metadata lines, header row, then rows in order."""
    buf = io.StringIO()
    for key, value in (meta or {}).items():
        buf.write(f"# {key}: {json.dumps(value, sort_keys=True)}\r\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in columns])
    return buf.getvalue()


def render_json(rows, columns, meta=None):
    doc = {
        "meta": meta or {},
        "columns": list(columns),
        "rows": [[_json_value(row.get(c)) for c in columns] for row in rows],
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def write_table(path, rows, columns, meta=None, fmt="csv"):
    if not path:
        raise ValueError("output path must not be empty")
    text = render_csv(rows, columns, meta) if fmt == "csv" else render_json(rows, columns, meta)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)
    return path


def read_csv_table(path):
    """(meta, rows as dicts of strings) from a file written by write_table."""
    meta = {}
    lines = []
    with open(path, newline="", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("# "):
                key, _, value = line[2:].partition(": ")
                meta[key] = json.loads(value)
            else:
                lines.append(line)
    reader = csv.DictReader(lines)
    return meta, list(reader)
