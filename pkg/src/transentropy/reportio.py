"""Deterministic serialization helpers for pipeline artifacts.

Every artifact opens with a provenance header (config digest, seed, code
version) so any file can be traced back to the run that produced it.
JSON is always emitted in canonical form to keep reruns byte-identical.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from . import __version__


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def meta_record(config_digest: str, seed: int, **extra) -> dict:
    meta = {"config_digest": config_digest, "seed": seed, "version": __version__}
    meta.update(extra)
    return {"meta": meta}


def write_jsonl(path: Path | str, meta: dict, records: list[dict]) -> None:
    """Atomic write: header line, then one record per line."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(meta) + "\n")
        for rec in records:
            fh.write(canonical_json(rec) + "\n")
    os.replace(tmp, path)


def read_jsonl(path: Path | str) -> tuple[dict, list[dict]]:
    """Returns (meta header, records). Files without a header get an empty meta."""
    meta: dict = {}
    records: list[dict] = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if i == 0 and "meta" in obj:
                meta = obj["meta"]
            else:
                records.append(obj)
    return meta, records


def write_csv(path: Path | str, meta: dict, header: str, rows: list[str]) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write("# " + canonical_json(meta["meta"]) + "\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")
    os.replace(tmp, path)


def write_json(path: Path | str, obj: dict) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(canonical_json(obj) + "\n", encoding="utf-8")
    os.replace(tmp, path)
