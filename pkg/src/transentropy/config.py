"""Run configuration and provenance digests."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

# operational knobs that do not change results; excluded from the digest so
# e.g. cache-on and cache-off runs of the same measurement compare equal
_NON_SEMANTIC = {"cache", "concurrency", "output_dir"}


@dataclass
class RunConfig:
    source_file: str
    target_file: str
    source_vocab_file: str
    target_vocab_file: str
    direction: str
    model_id: str
    output_dir: str
    synth_spec: str | None = None
    translator_url: str | None = None
    max_len: int = 128
    max_output_len: int = 128
    pivot_count: int = 100
    min_freq: int = 500
    max_freq: int = 1500
    sentences_per_token: int = 30
    keep: int = 24
    beta_c: float = 5.0
    k: int = 95
    bin_width: float = 1.0
    seed: int = 0
    concurrency: int = 4
    cache: str | None = None

    def __post_init__(self):
        if (self.synth_spec is None) == (self.translator_url is None):
            raise ConfigError("exactly one of synth_spec / translator_url must be set")
        if self.min_freq > self.max_freq:
            raise ConfigError("min_freq must not exceed max_freq")
        if not (1 <= self.k <= self.pivot_count):
            raise ConfigError("k must be within 1..pivot_count")
        if self.keep > self.sentences_per_token:
            raise ConfigError("keep cannot exceed sentences_per_token")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def semantic_dict(self) -> dict:
        """Fields that determine results; embedded in outputs and digested."""
        return {k: v for k, v in self.to_dict().items() if k not in _NON_SEMANTIC}

    def digest(self) -> str:
        blob = json.dumps(self.semantic_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path: Path | str) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def derive_seed(seed: int, *parts) -> int:
    """Stable sub-seed derivation; independent of interpreter hash randomization."""
    h = hashlib.sha256(":".join([str(seed), *map(str, parts)]).encode())
    return int.from_bytes(h.digest()[:8], "big")
