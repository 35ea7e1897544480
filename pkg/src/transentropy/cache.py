"""Persistent translation cache: append-only record log with an in-memory index.

Record layout: 32-byte key digest | u32 payload length | payload.
The payload is a CRC32 checksum followed by the output token ids (u32 each).
A truncated tail (crash mid-append) or a checksum mismatch evicts the record;
the log is rebuilt into memory on open, last record wins per key.
"""

from __future__ import annotations

import hashlib
import logging
import struct
import threading
from pathlib import Path

from .translator import DecodeParams, Translation, Translator

log = logging.getLogger(__name__)

_HEADER = struct.Struct(">32sI")


def cache_key(model_id: str, params: DecodeParams, source: tuple[int, ...]) -> bytes:
    h = hashlib.sha256()
    h.update(model_id.encode())
    h.update(b"\x00")
    h.update(params.strategy.encode())
    h.update(struct.pack(">I", params.max_output_len))
    h.update(b"".join(struct.pack(">I", t) for t in source))
    return h.digest()


def _pack_payload(translation: Translation) -> bytes:
    body = b"".join(struct.pack(">I", t) for t in translation)
    crc = struct.pack(">I", _crc(body))
    return crc + body


def _crc(body: bytes) -> int:
    import zlib

    return zlib.crc32(body) & 0xFFFFFFFF


def _unpack_payload(payload: bytes) -> Translation | None:
    if len(payload) < 4 or (len(payload) - 4) % 4 != 0:
        return None
    crc = struct.unpack(">I", payload[:4])[0]
    body = payload[4:]
    if crc != _crc(body):
        return None
    return tuple(struct.unpack(f">{len(body) // 4}I", body)) if body else ()


class TranslationCache:
    """Crash-safe key/value store for translations."""

    def __init__(self, path: Path | str):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._index: dict[bytes, Translation] = {}
        self._load()
        self._fh = open(self.path, "ab")

    def _load(self) -> None:
        if not self.path.exists():
            self.path.parent.mkdir(parents=True, exist_ok=True)
            return
        data = self.path.read_bytes()
        off = 0
        while off + _HEADER.size <= len(data):
            key, length = _HEADER.unpack_from(data, off)
            end = off + _HEADER.size + length
            if end > len(data):
                log.warning("cache %s: truncated tail record at offset %d dropped", self.path, off)
                break
            translation = _unpack_payload(data[off + _HEADER.size : end])
            if translation is None:
                log.warning("cache %s: corrupt record at offset %d evicted", self.path, off)
            else:
                self._index[key] = translation
            off = end

    def get(self, key: bytes) -> Translation | None:
        with self._lock:
            return self._index.get(key)

    def put(self, key: bytes, translation: Translation) -> None:
        payload = _pack_payload(translation)
        with self._lock:
            self._fh.write(_HEADER.pack(key, len(payload)) + payload)
            self._fh.flush()
            self._index[key] = translation

    def __len__(self) -> int:
        with self._lock:
            return len(self._index)

    def close(self) -> None:
        self._fh.close()


class CachingTranslator(Translator):
    """Transparent caching + dedup wrapper around another backend.

    Within a batch, duplicate inputs are resolved once. Across threads, an
    in-flight map guarantees a key is computed by at most one caller; others
    wait on the winner's event (atomic get-or-compute).
    """

    def __init__(self, inner: Translator, cache: TranslationCache | None = None):
        self.inner = inner
        self.cache = cache
        self._memory: dict[bytes, Translation] = {}
        self._lock = threading.Lock()
        self._inflight: dict[bytes, threading.Event] = {}
        self.inner_batches = 0
        self.inner_inputs = 0

    def _lookup(self, key: bytes) -> Translation | None:
        hit = self._memory.get(key)
        if hit is not None:
            return hit
        if self.cache is not None:
            hit = self.cache.get(key)
            if hit is not None:
                self._memory[key] = hit
        return hit

    def translate_batch(self, inputs, params: DecodeParams):
        inputs = [tuple(seq) for seq in inputs]
        keys = [cache_key(params.model_id, params, seq) for seq in inputs]

        owned: dict[bytes, tuple[int, ...]] = {}
        waiting: list[tuple[bytes, threading.Event]] = []
        with self._lock:
            for key, seq in zip(keys, inputs):
                if key in owned or self._lookup(key) is not None:
                    continue
                ev = self._inflight.get(key)
                if ev is not None:
                    waiting.append((key, ev))
                else:
                    self._inflight[key] = threading.Event()
                    owned[key] = seq

        if owned:
            order = list(owned.items())
            try:
                outputs = self.inner.translate_batch([seq for _, seq in order], params)
                self.inner_batches += 1
                self.inner_inputs += len(order)
                if len(outputs) != len(order):
                    raise RuntimeError("inner backend returned wrong output count")
                with self._lock:
                    for (key, _), out in zip(order, outputs):
                        self._memory[key] = out
                        if self.cache is not None:
                            self.cache.put(key, out)
            finally:
                with self._lock:
                    for key, _ in order:
                        self._inflight.pop(key).set()

        for key, ev in waiting:
            ev.wait()

        results = []
        with self._lock:
            for key in keys:
                hit = self._lookup(key)
                if hit is None:
                    raise RuntimeError("cache invariant broken: computed key missing")
                results.append(hit)
        return results

    def vocabulary(self, side: str):
        return self.inner.vocabulary(side)
