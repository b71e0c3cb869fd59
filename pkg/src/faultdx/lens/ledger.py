"""Append-only run ledger: one JSON object per line, digest-keyed.

Rows carry no wall-clock state, so a re-run over the same fixtures produces a
byte-identical file. Appends are serialized through a lock and flushed per
row; resuming skips keys that are already present.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Iterator


class Ledger:
    def __init__(self, path: Path | str):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._keys: set[str] = set()
        if self.path.exists():
            for row in self.rows():
                self._keys.add(row["key"])

    def rows(self) -> Iterator[dict]:
        if not self.path.exists():
            return
        with open(self.path) as f:
            for line in f:
                line = line.strip()
                if line:
                    yield json.loads(line)

    def __contains__(self, key: str) -> bool:
        return key in self._keys

    def get(self, key: str) -> dict | None:
        for row in self.rows():
            if row["key"] == key:
                return row
        return None

    def append(self, key: str, record: dict) -> bool:
        """Append once per key; returns False when the key already exists."""
        with self._lock:
            if key in self._keys:
                return False
            row = dict(record)
            row["key"] = key
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a") as f:
                f.write(json.dumps(row, sort_keys=True) + "\n")
                f.flush()
            self._keys.add(key)
            return True
