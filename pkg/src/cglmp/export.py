"""Serialization of reports to CSV/JSON and atomic file output."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

SCHEMA_VERSION = 1


def write_atomic(path: str | os.PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _header(config: dict) -> str:
    return (
        f"# schema_version={SCHEMA_VERSION}\n"
        f"# config={json.dumps(config, sort_keys=True)}\n"
    )


def csv_table(config: dict, columns: list[str], rows) -> str:
    lines = [",".join(columns)]
    lines += [",".join(_num(v) for v in row) for row in rows]
    return _header(config) + "\n".join(lines) + "\n"


def json_document(config: dict, results: list) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "config": config, "results": results}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def reports_csv(reports, config: dict) -> str:
    return csv_table(config, ["d", "I_d", "stderr"], [(r.d, r.value, r.stderr) for r in reports])


def reports_json(reports, config: dict) -> str:
    return json_document(config, [r.to_dict() for r in reports])


def witness_csv(results, config: dict) -> str:
    return csv_table(config, ["d", "fidelity", "S_L"], [(w.d, w.fidelity, w.bound) for w in results])


def witness_json(results, config: dict) -> str:
    rows = [{"d": w.d, "fidelity": w.fidelity, "S_L": w.bound, "certified": w.certified} for w in results]
    return json_document(config, rows)


ANGLE_COLUMNS = ["party", "setting", "outcome", "qubit_m", "theta_hwp_rad", "gamma_qwp_rad"]


def angles_csv(rows, config: dict) -> str:
    return csv_table(config, ANGLE_COLUMNS, rows)


def angles_json(rows, config: dict) -> str:
    return json_document(config, [dict(zip(ANGLE_COLUMNS, r)) for r in rows])


def read_csv_rows(text: str) -> list[dict[str, str]]:
    """Parse a CSV written by this module, skipping '#' comment lines."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    head = lines[0].split(",")
    return [dict(zip(head, ln.split(","))) for ln in lines[1:]]
