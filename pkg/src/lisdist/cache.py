"""Disk cache for series coefficients and exact tables.

Layout: one gzipped JSON file per l holding the scaled integer
coefficient arrays up to the largest K computed so far; files carry a
payload hash so a torn write is detected and recomputed. Writes go via a
temp file + atomic rename.
"""

from __future__ import annotations

import gzip
import hashlib
import json
import os
import tempfile
from pathlib import Path

from .config import default_cache_dir

_FORMAT = "lisdist.chazy.v1"


def _payload_sha(A, C):
    h = hashlib.sha256()
    for part in (A, C):
        for v in part:
            h.update(str(v).encode())
            h.update(b",")
        h.update(b";")
    return h.hexdigest()


class SeriesCache:
    def __init__(self, root=None):
        self.root = Path(root) if root is not None else default_cache_dir()

    def _path(self, l):
        return self.root / f"chazy_l{l}.json.gz"

    def load(self, l):
        """Return (A, C) integer lists, or None if absent/corrupt."""
        p = self._path(l)
        if not p.exists():
            return None
        try:
            with gzip.open(p, "rt") as f:
                doc = json.load(f)
            if doc.get("format") != _FORMAT or doc.get("l") != l:
                return None
            A = [int(v) for v in doc["A"]]
            C = [int(v) for v in doc["C"]]
            if doc.get("sha") != _payload_sha(A, C):
                return None
            return A, C
        except (OSError, ValueError, KeyError):
            return None

    def store(self, l, A, C):
        self.root.mkdir(parents=True, exist_ok=True)
        doc = {
            "format": _FORMAT,
            "l": l,
            "K": len(A) - 1,
            "A": [str(v) for v in A],
            "C": [str(v) for v in C],
            "sha": _payload_sha(A, C),
        }
        p = self._path(l)
        fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0) as gz:
                gz.write(json.dumps(doc, sort_keys=True).encode())
            os.replace(tmp, p)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise
