"""Append-only annotation log.

One canonical JSON record per line. Appends are serialized through a
lock with atomic version assignment per (image_id, annotator_id); session
state is derived purely from the log, so a restarted service sees exactly
the statuses and versions it had before.
"""

from __future__ import annotations

import threading
from dataclasses import replace
from pathlib import Path
from typing import Optional

from ..annotations import deserialize_annotation, record_to_dict, serialize_annotation
from ..types import AnnotationRecord, Scheme


def _payload_key(record: AnnotationRecord) -> tuple:
    doc = record_to_dict(record)
    doc.pop("version")
    return tuple(sorted((k, repr(v)) for k, v in doc.items()))


class AnnotationLog:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: list[AnnotationRecord] = []
        if self.path.exists():
            for line in self.path.read_bytes().splitlines():
                if line.strip():
                    self._records.append(deserialize_annotation(line))

    @property
    def records(self) -> tuple[AnnotationRecord, ...]:
        return tuple(self._records)

    def latest_for_image(
        self, image_id: str, scheme: Optional[Scheme] = None
    ) -> Optional[AnnotationRecord]:
        """Highest-version record for the image, optionally per scheme."""
        best = None
        for record in self._records:
            if record.image_id != image_id:
                continue
            if scheme is not None and record.scheme != scheme:
                continue
            if best is None or record.version > best.version:
                best = record
        return best

    def submit(self, record: AnnotationRecord) -> tuple[bool, int]:
        """Append with the next version for (image_id, annotator_id).

        Resubmitting a byte-identical record returns the stored version
        without appending.
        """
        with self._lock:
            same_key = [
                r
                for r in self._records
                if r.image_id == record.image_id and r.annotator_id == record.annotator_id
            ]
            if same_key:
                latest = max(same_key, key=lambda r: r.version)
                if _payload_key(latest) == _payload_key(record):
                    return True, latest.version
                next_version = latest.version + 1
            else:
                next_version = 1
            stored = replace(record, version=next_version)
            with open(self.path, "ab") as fh:
                fh.write(serialize_annotation(stored) + b"\n")
                fh.flush()
            self._records.append(stored)
            return True, next_version
