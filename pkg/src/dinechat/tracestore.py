"""Durable trace persistence: one JSONL file per trace under a data directory.

Line 1 is a version header with trace metadata; every further line is one
timestep record. Reads are safe concurrently; writes to a single trace are
serialized behind a process-wide lock.
"""

import json
import threading
from pathlib import Path

from .dines import TimestepRecord, Trace
from .errors import ConfigurationError, NotFoundError

TRACE_SCHEMA_VERSION = 1


class TraceStore:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    def _path(self, trace_id):
        safe = str(trace_id)
        if not safe or "/" in safe or safe.startswith("."):
            raise ConfigurationError(f"invalid trace id: {trace_id!r}")
        return self.root / f"{safe}.jsonl"

    def store(self, trace):
        if not trace.records:
            raise ConfigurationError("refusing to store an empty trace")
        path = self._path(trace.trace_id)
        header = {
            "version": TRACE_SCHEMA_VERSION,
            "trace_id": trace.trace_id,
            "description": trace.description,
            "checkpoint_ref": trace.checkpoint_ref,
        }
        lines = [json.dumps(header)]
        lines.extend(json.dumps(r.to_dict()) for r in trace.records)
        with self._write_lock:
            path.write_text("\n".join(lines) + "\n")
        return trace.trace_id

    def load(self, trace_id):
        path = self._path(trace_id)
        if not path.exists():
            raise NotFoundError(f"trace not found: {trace_id!r}")
        lines = path.read_text().splitlines()
        header = json.loads(lines[0])
        if header.get("version") != TRACE_SCHEMA_VERSION:
            raise ConfigurationError(
                f"unsupported trace schema version: {header.get('version')!r}"
            )
        records = [TimestepRecord.from_dict(json.loads(line))
                   for line in lines[1:] if line.strip()]
        return Trace(
            trace_id=header["trace_id"],
            description=header.get("description", ""),
            checkpoint_ref=header.get("checkpoint_ref", ""),
            records=records,
        )

    def list_ids(self):
        return sorted(p.stem for p in self.root.glob("*.jsonl"))

    def exists(self, trace_id):
        return self._path(trace_id).exists()
