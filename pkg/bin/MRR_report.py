# ## @DOC
# ### MRR Report
# Markdown tables and byte-stable JSON/CSV artifacts with a provenance sidecar.



import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

sys.path.append(str(Path(__file__).parent))
from MRR_config_utils import ROOT_DIR, toml  # noqa: E402
from MRR_errors import IoError  # noqa: E402


def tool_version():
    try:
        with open(ROOT_DIR / "pyproject.toml", "rb") as f:
            return toml.load(f)["project"]["version"]
    except (OSError, KeyError):
        return "unknown"


def format_cell(value):
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        if value == 0:
            return "0"
        if abs(value) >= 1e5 or abs(value) < 1e-3:
            return f"{value:.3e}"
        return f"{value:.4g}"
    return str(value)


def print_markdown_table(headers, rows, stream=None):
    stream = stream or sys.stdout
    print("| " + " | ".join(headers) + " |", file=stream)
    print("| " + " | ".join(":---" for _ in headers) + " |", file=stream)
    for row in rows:
        print("| " + " | ".join(format_cell(v) for v in row) + " |", file=stream)


def to_json(data):
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def to_csv(headers, rows, config=None):
    buffer = io.StringIO()
    if config is not None:
        buffer.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows(["" if v is None else v for v in row] for row in rows)
    return buffer.getvalue()


def write_artifacts(out_dir, command, fmt, payload, headers=None, rows=None, meta=None):
    """Write `<command>.<fmt>` and its `<command>.meta.json` sidecar; return both paths."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        primary = out_dir / f"{command}.{fmt}"
        if fmt == "csv":
            text = to_csv(headers, rows, payload.get("config"))
        else:
            text = to_json(payload)
        primary.write_text(text, encoding="utf-8")

        sidecar = out_dir / f"{command}.meta.json"
        sidecar.write_text(
            to_json(
                {
                    "command": command,
                    "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
                    "tool_version": tool_version(),
                    **(meta or {}),
                }
            ),
            encoding="utf-8",
        )
    except OSError as e:
        raise IoError(f"cannot write artifacts to {out_dir}: {e}", path=out_dir) from e
    return primary, sidecar
