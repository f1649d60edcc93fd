"""Result persistence: atomic CSV/JSON writers with config echo.

Every output starts with the resolved config and a version stamp; data
rows are byte-identical across reruns and worker counts.  Timestamps and
runtime-only settings (thread count) are suppressed under deterministic
mode so whole files compare equal.
"""

from __future__ import annotations

import datetime
import json
import os
import subprocess
import tempfile
from typing import Any, Mapping, Sequence


def version_stamp() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             capture_output=True, text=True, timeout=10,
                             cwd=os.path.dirname(os.path.abspath(__file__)))
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except Exception:
        pass
    from . import __version__

    return __version__


def _fmt(v: Any) -> str:
    if hasattr(v, "item"):  # numpy scalar
        v = v.item()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def atomic_write_text(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_csv(columns: Sequence[str], rows: Sequence[Sequence[Any]],
               config: Mapping[str, Any], deterministic: bool) -> str:
    lines = [f"# config: {json.dumps(dict(config), sort_keys=True, default=str)}",
             f"# version: {version_stamp()}"]
    if not deterministic:
        lines.append(f"# timestamp: {datetime.datetime.now().isoformat()}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _plain(v: Any):
    if hasattr(v, "item"):
        return v.item()
    return v


def render_json(columns: Sequence[str], rows: Sequence[Sequence[Any]],
                config: Mapping[str, Any], summary: Mapping[str, Any],
                deterministic: bool) -> str:
    obj = {
        "config": dict(config),
        "version": version_stamp(),
        "summary": dict(summary),
        "columns": list(columns),
        "rows": [[_plain(v) for v in r] for r in rows],
    }
    if not deterministic:
        obj["timestamp"] = datetime.datetime.now().isoformat()
    return json.dumps(obj, sort_keys=True, default=str, indent=1) + "\n"


def render_summary_json(config: Mapping[str, Any], summary: Mapping[str, Any],
                        deterministic: bool) -> str:
    obj = {
        "config": dict(config),
        "version": version_stamp(),
        "summary": dict(summary),
    }
    if not deterministic:
        obj["timestamp"] = datetime.datetime.now().isoformat()
    return json.dumps(obj, sort_keys=True, default=str, indent=1) + "\n"


def write_result(out_path: str, fmt: str, columns, rows, config, summary,
                 deterministic: bool) -> list[str]:
    """Write the table (+ JSON summary sidecar for csv format).

    Returns the list of files written.
    """
    written = []
    if fmt == "json":
        atomic_write_text(out_path, render_json(columns, rows, config, summary,
                                                deterministic))
        written.append(out_path)
    else:
        atomic_write_text(out_path, render_csv(columns, rows, config, deterministic))
        written.append(out_path)
        side = os.path.splitext(out_path)[0] + ".json"
        atomic_write_text(side, render_summary_json(config, summary, deterministic))
        written.append(side)
    return written
