"""Model adapters behind the HTTP shim.

An adapter owns one served model: it maps batches of source token-id
sequences to target token-id sequences and exports both vocabularies.
Adapters must be deterministic (identical input sequence, identical output,
across calls and process restarts) and batch-invariant (an input's output
does not depend on what else is in the batch).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, runtime_checkable


@runtime_checkable
class ModelAdapter(Protocol):
    model_id: str

    def translate_batch(self, inputs: list[list[int]], max_output_len: int) -> list[list[int]]:
        ...

    def vocab_entries(self, side: str) -> list[dict]:
        """List of {"id", "surface", "special"} dicts for 'source' or 'target'."""
        ...


@dataclass
class TokenMapAdapter:
    """Deterministic table-lookup adapter.

    Each source token maps to a single target token, or to nothing when the
    mapping entry is null. Token-wise, so batch invariance is structural.
    Used for protocol tests and for serving without model weights.
    """

    model_id: str
    mapping: list[int | None]
    target_vocab_size: int
    special_tokens: set[int] = field(default_factory=set)

    def __post_init__(self):
        for tgt in self.mapping:
            if tgt is not None and not (0 <= tgt < self.target_vocab_size):
                raise ValueError(f"mapping target {tgt} outside target vocabulary")
        for tok in self.special_tokens:
            if not (0 <= tok < len(self.mapping)):
                raise ValueError(f"special token {tok} outside source vocabulary")

    @classmethod
    def load(cls, path: Path | str) -> "TokenMapAdapter":
        d = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            model_id=d["model_id"],
            mapping=list(d["mapping"]),
            target_vocab_size=d["target_vocab_size"],
            special_tokens=set(d.get("special_tokens", [])),
        )

    def translate_batch(self, inputs: list[list[int]], max_output_len: int) -> list[list[int]]:
        mapping = self.mapping
        results = []
        for seq in inputs:
            out = [mapping[tok] for tok in seq if mapping[tok] is not None]
            results.append(out[:max_output_len])
        return results

    def vocab_entries(self, side: str) -> list[dict]:
        if side == "source":
            return [
                {"id": i, "surface": f"s{i}", "special": i in self.special_tokens}
                for i in range(len(self.mapping))
            ]
        if side == "target":
            return [
                {"id": i, "surface": f"t{i}", "special": False}
                for i in range(self.target_vocab_size)
            ]
        raise ValueError(f"unknown side {side!r}")


class HFGreedyAdapter:
    """Serves a local Hugging Face seq2seq checkpoint with greedy decoding.

    Inputs and outputs are token ids in the checkpoint's own vocabularies
    (shared tokenizer for both sides in Marian-family models). Each sequence
    is decoded independently so padding never influences results.
    """

    def __init__(self, model_path: str, model_id: str | None = None):
        import torch
        from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

        self._torch = torch
        self.model_id = model_id or Path(model_path).name
        self.tokenizer = AutoTokenizer.from_pretrained(model_path)
        self.model = AutoModelForSeq2SeqLM.from_pretrained(model_path)
        self.model.eval()
        self._strip = set(self.tokenizer.all_special_ids)

    def translate_batch(self, inputs: list[list[int]], max_output_len: int) -> list[list[int]]:
        torch = self._torch
        results = []
        with torch.no_grad():
            for seq in inputs:
                ids = torch.tensor([seq], dtype=torch.long)
                out = self.model.generate(
                    input_ids=ids,
                    do_sample=False,
                    num_beams=1,
                    max_new_tokens=max_output_len,
                )
                results.append([t for t in out[0].tolist() if t not in self._strip])
        return results

    def vocab_entries(self, side: str) -> list[dict]:
        if side not in ("source", "target"):
            raise ValueError(f"unknown side {side!r}")
        specials = set(self.tokenizer.all_special_ids)
        entries = sorted(self.tokenizer.get_vocab().items(), key=lambda kv: kv[1])
        return [
            {"id": tid, "surface": surface, "special": tid in specials}
            for surface, tid in entries
        ]
