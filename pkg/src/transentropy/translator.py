"""Deterministic translator backends.

All backends share one contract: ``translate_batch`` is pure and
batch-invariant (the same input sequence yields the same output no matter
how the batch is arranged), and ``vocabulary`` exposes the exact token
universe the substitution sweeps run over.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import requests

from .corpus import Vocab, VocabEntry
from .errors import ProtocolError, TransportError

Translation = tuple[int, ...]

GREEDY = "greedy"


@dataclass(frozen=True)
class DecodeParams:
    model_id: str
    strategy: str = GREEDY
    max_output_len: int = 128

    def __post_init__(self):
        if self.strategy != GREEDY:
            raise ValueError(f"unsupported decode strategy {self.strategy!r}")


class Translator:
    """Contract shared by all backends."""

    def translate_batch(self, inputs: list[tuple[int, ...]], params: DecodeParams) -> list[Translation]:
        raise NotImplementedError

    def vocabulary(self, side: str) -> Vocab:
        """side is 'source' or 'target'."""
        raise NotImplementedError


@dataclass
class SynthSpec:
    """Fully deterministic token-wise translator with known degeneracy structure.

    Every source token belongs to one synonym group; a group emits one target
    token. Tokens in ``drop`` emit nothing. A context rule
    ``(token, left_neighbor, group)`` overrides the token's group when it is
    immediately preceded by that neighbor in the source; the first matching
    rule wins.
    """

    source_vocab_size: int
    target_vocab_size: int
    groups: list[int]                      # per source token id
    emissions: list[int]                   # per group id -> target token id
    drop: set[int] = field(default_factory=set)
    context_rules: list[tuple[int, int, int]] = field(default_factory=list)
    special_tokens: set[int] = field(default_factory=set)

    def validate(self) -> None:
        if len(self.groups) != self.source_vocab_size:
            raise ValueError("groups must cover every source token")
        for g in self.groups:
            if not (0 <= g < len(self.emissions)):
                raise ValueError(f"group id {g} has no emission")
        for e in self.emissions:
            if not (0 <= e < self.target_vocab_size):
                raise ValueError(f"emission {e} outside target vocabulary")
        for tok, left, grp in self.context_rules:
            if not (0 <= tok < self.source_vocab_size and 0 <= left < self.source_vocab_size):
                raise ValueError("context rule references invalid source token")
            if not (0 <= grp < len(self.emissions)):
                raise ValueError("context rule references invalid group")
        for tok in self.drop | self.special_tokens:
            if not (0 <= tok < self.source_vocab_size):
                raise ValueError("drop/special token outside source vocabulary")

    def to_json(self) -> str:
        return json.dumps(
            {
                "source_vocab_size": self.source_vocab_size,
                "target_vocab_size": self.target_vocab_size,
                "groups": self.groups,
                "emissions": self.emissions,
                "drop": sorted(self.drop),
                "context_rules": [list(r) for r in self.context_rules],
                "special_tokens": sorted(self.special_tokens),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "SynthSpec":
        d = json.loads(text)
        spec = cls(
            source_vocab_size=d["source_vocab_size"],
            target_vocab_size=d["target_vocab_size"],
            groups=list(d["groups"]),
            emissions=list(d["emissions"]),
            drop=set(d.get("drop", [])),
            context_rules=[tuple(r) for r in d.get("context_rules", [])],
            special_tokens=set(d.get("special_tokens", [])),
        )
        spec.validate()
        return spec

    @classmethod
    def load(cls, path: Path | str) -> "SynthSpec":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def synth_translate(spec: SynthSpec, seq: tuple[int, ...]) -> Translation:
    """Evaluate one source sequence under the synthetic mapping."""
    rules = {}
    for tok, left, grp in spec.context_rules:
        rules.setdefault((tok, left), grp)
    emit = spec.emissions
    groups = spec.groups
    drop = spec.drop
    out = []
    prev = -1
    for tok in seq:
        if tok not in drop:
            g = rules.get((tok, prev))
            out.append(emit[g if g is not None else groups[tok]])
        prev = tok
    return tuple(out)


class SyntheticTranslator(Translator):
    """In-process backend evaluating a SynthSpec; the pipeline's test oracle partner."""

    def __init__(self, spec: SynthSpec):
        spec.validate()
        self.spec = spec
        # flatten for speed: per-token emission plus a small override map
        self._emit = [spec.emissions[g] for g in spec.groups]
        self._drop = spec.drop
        self._rules = {}
        for tok, left, grp in spec.context_rules:
            self._rules.setdefault((tok, left), spec.emissions[grp])

    def translate_batch(self, inputs, params=None):
        emit = self._emit
        drop = self._drop
        rules = self._rules
        results = []
        if not rules and not drop:
            for seq in inputs:
                results.append(tuple(emit[tok] for tok in seq))
            return results
        for seq in inputs:
            out = []
            prev = -1
            for tok in seq:
                if tok not in drop:
                    over = rules.get((tok, prev))
                    out.append(over if over is not None else emit[tok])
                prev = tok
            results.append(tuple(out))
        return results

    def vocabulary(self, side: str) -> Vocab:
        if side == "source":
            n, specials = self.spec.source_vocab_size, self.spec.special_tokens
            prefix = "s"
        elif side == "target":
            n, specials = self.spec.target_vocab_size, set()
            prefix = "t"
        else:
            raise ValueError(f"unknown side {side!r}")
        return Vocab([VocabEntry(i, f"{prefix}{i}", i in specials) for i in range(n)])


class HttpTranslator(Translator):
    """Client for the JSON-over-HTTP model server.

    Retries transport failures and 503s with exponential backoff; any other
    deviation from the wire contract aborts the run.
    """

    def __init__(self, base_url: str, max_retries: int = 5, backoff: float = 0.5,
                 session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.max_retries = max_retries
        self.backoff = backoff
        self.session = session or requests.Session()

    def _request(self, method: str, path: str, **kwargs):
        last_exc: Exception | None = None
        for attempt in range(self.max_retries):
            try:
                resp = self.session.request(method, self.base_url + path, timeout=300, **kwargs)
            except requests.RequestException as exc:
                last_exc = exc
                time.sleep(self.backoff * (2 ** attempt))
                continue
            if resp.status_code == 503:
                last_exc = TransportError("backend overloaded (503)")
                time.sleep(self.backoff * (2 ** attempt))
                continue
            if resp.status_code != 200:
                raise ProtocolError(f"backend returned {resp.status_code}: {resp.text[:200]}")
            return resp
        raise TransportError(f"backend unreachable after {self.max_retries} attempts: {last_exc}")

    def translate_batch(self, inputs, params: DecodeParams):
        body = {
            "model": params.model_id,
            "decode": {"strategy": params.strategy, "max_output_len": params.max_output_len},
            "inputs": [list(seq) for seq in inputs],
        }
        resp = self._request("POST", "/v1/translate", json=body)
        try:
            outputs = resp.json()["outputs"]
        except (ValueError, KeyError) as exc:
            raise ProtocolError(f"malformed translate response: {exc}")
        if len(outputs) != len(inputs):
            raise ProtocolError(
                f"backend returned {len(outputs)} outputs for {len(inputs)} inputs"
            )
        return [tuple(out) for out in outputs]

    def vocabulary(self, side: str) -> Vocab:
        resp = self._request("GET", f"/v1/vocab?side={side}")
        try:
            entries = resp.json()["entries"]
            return Vocab([VocabEntry(e["id"], e["surface"], bool(e["special"])) for e in entries])
        except (ValueError, KeyError, TypeError) as exc:
            raise ProtocolError(f"malformed vocab response: {exc}")
