import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

from src.models import Cell, Settings, Table

logger = logging.getLogger(__name__)


def format_cell(value: Cell) -> str:
    """Floats at 17 significant digits so every row round-trips exactly."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.17g}"
    return str(value)


def config_header(settings: Settings) -> dict:
    return settings.model_dump(mode="json")


def render_csv(tables: list[Table], settings: Settings) -> str:
    buffer = io.StringIO()
    for key, value in config_header(settings).items():
        buffer.write(f"# {key}: {json.dumps(value)}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    for i, table in enumerate(tables):
        if len(tables) > 1:
            if i > 0:
                buffer.write("\n")
            buffer.write(f"# [{table.name}]\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([format_cell(v) for v in row])
    return buffer.getvalue()


def _json_cell(value: Cell) -> Cell:
    if isinstance(value, float) and not math.isfinite(value):
        return format_cell(value)
    return value


def render_json(tables: list[Table], settings: Settings) -> str:
    payload: dict = {"config": config_header(settings)}
    for table in tables:
        payload[table.name] = [
            {column: _json_cell(v) for column, v in zip(table.columns, row)}
            for row in table.rows
        ]
    return json.dumps(payload, indent=2) + "\n"


def render(tables: list[Table], settings: Settings) -> str:
    if settings.format == "json":
        return render_json(tables, settings)
    return render_csv(tables, settings)


def write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    logger.info(f"Wrote {len(text)} chars to {path}")
