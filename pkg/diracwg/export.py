import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    """17 significant digits for floats, so that every number read back is the number written."""
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


class DataExporter:
    """Serializes tables and reports together with the resolved run configuration."""

    def __init__(self, config: Dict[str, Any]):
        self.config = config
        self.config_line = json.dumps(config, sort_keys=True, separators=(",", ":"))

    def csv_text(
        self, header: Sequence[str], rows: Iterable[Sequence[Any]], notes: Optional[Dict[str, Any]] = None
    ) -> str:
        buffer = io.StringIO()
        buffer.write(f"# config: {self.config_line}\n")
        for key, value in (notes or {}).items():
            buffer.write(f"# {key}: {format_value(value)}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
        return buffer.getvalue()

    def json_text(self, payload: Dict[str, Any]) -> str:
        # json writes floats with repr, which round-trips exactly
        return json.dumps({"config": self.config, **payload}, indent=2, sort_keys=False) + "\n"

    def emit(self, text: str, output: Optional[Path] = None) -> None:
        if output is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        output = Path(output)
        output.parent.mkdir(parents=True, exist_ok=True)
        output.write_text(text, encoding="utf-8")
        logger.info("wrote %s", output)
