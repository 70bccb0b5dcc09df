"""Extracted-artifact store: one CSV + XES (and optional BPMN) per process key.

The extract command writes here; analysis commands and the read-only
service load from here. File names are percent-encoded process keys.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Union
from urllib.parse import quote, unquote

from .csvlog import export_csv, import_csv
from .eventlog import EventLog, merge_logs
from .xes import export_xes


class StoreError(Exception):
    pass


def _encode(key: str) -> str:
    return quote(key, safe="")


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class ArtifactStore:
    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)

    def csv_path(self, key: str) -> Path:
        return self.directory / f"{_encode(key)}.csv"

    def xes_path(self, key: str) -> Path:
        return self.directory / f"{_encode(key)}.xes"

    def model_path(self, key: str) -> Path:
        return self.directory / f"{_encode(key)}.bpmn"

    def process_keys(self) -> list[str]:
        if not self.directory.is_dir():
            return []
        return sorted(unquote(p.stem) for p in self.directory.glob("*.csv"))

    def has_process(self, key: str) -> bool:
        return self.csv_path(key).is_file()

    def load_log(self, key: str) -> EventLog:
        path = self.csv_path(key)
        if not path.is_file():
            raise StoreError(f"no extracted log for process {key!r}")
        return import_csv(path.read_bytes(), process_key=key)

    def write_log(self, event_log: EventLog) -> None:
        key = event_log.process_key
        _atomic_write(self.csv_path(key), export_csv(event_log))
        _atomic_write(self.xes_path(key), export_xes(event_log).encode("utf-8"))

    def append_delta(self, delta: EventLog) -> EventLog:
        """Merge a delta into the stored log and rewrite both serializations."""
        key = delta.process_key
        if self.has_process(key):
            merged = merge_logs(self.load_log(key), delta)
        else:
            merged = delta
        self.write_log(merged)
        return merged

    def write_model(self, key: str, xml: Union[str, bytes]) -> None:
        data = xml.encode("utf-8") if isinstance(xml, str) else xml
        _atomic_write(self.model_path(key), data)

    def load_model_xml(self, key: str) -> bytes | None:
        path = self.model_path(key)
        return path.read_bytes() if path.is_file() else None
