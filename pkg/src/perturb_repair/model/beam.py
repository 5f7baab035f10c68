"""Greedy and beam-search decoding."""
from __future__ import annotations

from dataclasses import dataclass

import torch

from ..tokenizer import BOS, EOS, PAD
from .transformer import Seq2Seq

LENGTH_ALPHA = 0.7
BANNED = (PAD, BOS)


@dataclass(frozen=True)
class Candidate:
    tokens: tuple  # generated ids, ending with EOS unless cut at the length limit
    logprob: float
    score: float  # logprob / len(tokens) ** alpha


def normalized(logprob: float, length: int, alpha: float = LENGTH_ALPHA) -> float:
    return logprob / max(length, 1) ** alpha


def _next_logprobs(model: Seq2Seq, memory, keys, prefixes: list) -> torch.Tensor:
    tgt = torch.tensor(prefixes, dtype=torch.long)
    n = tgt.shape[0]
    logits = model.decode(tgt, memory.expand(n, -1, -1), keys.expand(n, -1, -1))[:, -1]
    logits[:, list(BANNED)] = float("-inf")
    return torch.log_softmax(logits, dim=-1)


def _encode(model: Seq2Seq, src_ids):
    src = torch.tensor([list(src_ids)], dtype=torch.long)
    return model.encode(src)


def _limit(model: Seq2Seq, max_len: int | None) -> int:
    return max_len if max_len is not None else model.cfg.max_output_tokens - 1


@torch.no_grad()
def greedy(model: Seq2Seq, src_ids, max_len: int | None = None) -> Candidate:
    model.eval()
    memory, keys = _encode(model, src_ids)
    out, total = [], 0.0
    for _ in range(_limit(model, max_len)):
        lp = _next_logprobs(model, memory, keys, [[BOS] + out])[0]
        tok = int(torch.argmax(lp))
        total += float(lp[tok])
        out.append(tok)
        if tok == EOS:
            break
    return Candidate(tuple(out), total, normalized(total, len(out)))


@torch.no_grad()
def beam_search(model: Seq2Seq, src_ids, beam_size: int, n_best: int | None = None,
                max_len: int | None = None, alpha: float = LENGTH_ALPHA) -> list[Candidate]:
    """Up to `n_best` candidates ranked by length-normalized log-probability.

    Each step ranks the expansions of every live hypothesis by cumulative
    log-probability. EOS expansions among the top `beam_size` retire; the
    best `beam_size` other expansions stay live, so the beam never shrinks.
    Hypotheses reaching `max_len` retire too. Once `beam_size` hypotheses
    have retired, search stops as soon as no live hypothesis has a better
    normalized score than the `beam_size`-th best retired one.
    """
    n_best = beam_size if n_best is None else n_best
    if not beam_size >= n_best >= 1:
        raise ValueError("need beam_size >= n_best >= 1")
    model.eval()
    memory, keys = _encode(model, src_ids)
    limit = _limit(model, max_len)
    live = [((), 0.0)]
    finished: list[Candidate] = []
    for step in range(limit):
        lp = _next_logprobs(model, memory, keys, [[BOS, *t] for t, _ in live])
        totals = torch.tensor([s for _, s in live], dtype=lp.dtype)[:, None] + lp
        flat = totals.reshape(-1)
        k = min(2 * beam_size, int(torch.isfinite(flat).sum()))
        order = torch.topk(flat, k).indices.tolist()
        vocab = lp.shape[1]
        nxt = []
        for rank, idx in enumerate(order):
            h, tok = divmod(idx, vocab)
            tokens = live[h][0] + (tok,)
            score = float(flat[idx])
            if tok == EOS:
                if rank < beam_size:
                    finished.append(Candidate(tokens, score, normalized(score, len(tokens), alpha)))
            elif len(nxt) < beam_size:
                if step == limit - 1:
                    finished.append(Candidate(tokens, score, normalized(score, len(tokens), alpha)))
                else:
                    nxt.append((tokens, score))
        live = nxt
        if not live:
            break
        if len(finished) >= beam_size:
            finished.sort(key=lambda c: (-c.score, c.tokens))
            del finished[beam_size:]
            if max(normalized(sc, len(t), alpha) for t, sc in live) <= finished[-1].score:
                break
    finished.sort(key=lambda c: (-c.score, c.tokens))
    return finished[:n_best]
