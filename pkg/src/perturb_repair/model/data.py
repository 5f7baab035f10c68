"""Model inputs and targets built from training samples."""
from __future__ import annotations

from dataclasses import dataclass

import torch

from ..tokenizer import BOS, BUG, CONTEXT, EOS, PAD, Tokenizer
from .config import VARIANTS


class EmptyDataset(ValueError):
    pass


def select_samples(samples, variant: str) -> list:
    """Training samples used by an input variant (the kind filters drop samples)."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "ce-only":
        return [s for s in samples if s.kind == "CE"]
    if variant == "fe-only":
        return [s for s in samples if s.kind == "FE"]
    return list(samples)


def input_ids(tok: Tokenizer, buggy: str, context: str, diagnostic: str,
              max_tokens: int, variant: str = "full") -> list[int]:
    """`[BUG] buggy [CONTEXT] context diagnostic [EOS]`, shortening the context first."""
    bug = [BUG] + tok.encode(buggy)
    ctx = [CONTEXT] + tok.encode(context)
    diag = [] if variant == "no-diagnostic" else tok.encode(diagnostic)
    room = max_tokens - 1 - len(bug) - len(diag)
    if room < 1:
        ctx = [CONTEXT]
        room = max_tokens - 2 - len(bug)
        diag = diag[:max(room, 0)]
        bug = bug[:max_tokens - 2 - len(diag)]
    else:
        ctx = ctx[:room]
    return bug + ctx + diag + [EOS]


def sample_input(tok: Tokenizer, sample, max_tokens: int, variant: str = "full") -> list[int]:
    return input_ids(tok, sample.buggy, sample.context, sample.diagnostic, max_tokens, variant)


def target_ids(tok: Tokenizer, fix: str) -> list[int]:
    return [BOS] + tok.encode(fix) + [EOS]


@dataclass
class Example:
    src: list
    tgt: list  # BOS ... EOS


def make_examples(tok: Tokenizer, samples, max_input: int, max_output: int, variant: str = "full"):
    """Encoded examples plus the number of samples dropped for an over-long fix."""
    out, dropped = [], 0
    for s in samples:
        tgt = target_ids(tok, s.fix)
        if len(tgt) > max_output:
            dropped += 1
            continue
        out.append(Example(sample_input(tok, s, max_input, variant), tgt))
    return out, dropped


def pad(rows: list, value: int = PAD) -> torch.Tensor:
    width = max(len(r) for r in rows)
    return torch.tensor([r + [value] * (width - len(r)) for r in rows], dtype=torch.long)


def collate(batch: list) -> tuple:
    """(src, decoder input, decoder target), each padded to the batch maximum."""
    src = pad([e.src for e in batch])
    tgt_in = pad([e.tgt[:-1] for e in batch])
    tgt_out = pad([e.tgt[1:] for e in batch])
    return src, tgt_in, tgt_out
