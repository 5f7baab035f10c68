import itertools
import random

import math
from types import SimpleNamespace

import pytest
import torch

from perturb_repair.model.beam import beam_search, greedy, normalized
from perturb_repair.tokenizer import BOS, EOS

from oracles import model_with, sequence_logprob


def test_beam_one_is_greedy():
    rng = random.Random(0)
    for trial in range(20):
        model = model_with(16, seed=trial)
        src = [rng.randrange(3, 16) for _ in range(rng.randrange(1, 7))] + [EOS]
        g = greedy(model, src)
        b = beam_search(model, src, 1)
        assert len(b) == 1 and b[0].tokens == g.tokens
        assert b[0].logprob == pytest.approx(g.logprob, abs=1e-12)


def test_exhaustive_oracle_on_small_vocab():
    # ids 0..4: PAD and BOS are banned, leaving EOS and two others
    model = model_with(5, seed=7)
    src, max_len = [3, 4, EOS], 3
    usable = [EOS, 3, 4]
    every = []
    for n in range(1, max_len + 1):
        for seq in itertools.product(usable, repeat=n):
            if EOS in seq[:-1] or (n < max_len and seq[-1] != EOS):
                continue
            lp = sequence_logprob(model, src, list(seq))
            every.append((normalized(lp, n), seq, lp))
    every.sort(key=lambda t: (-t[0], t[1]))
    assert len(every) == 1 + 2 + 12
    got = beam_search(model, src, beam_size=15, max_len=max_len)
    assert [c.tokens for c in got] == [seq for _, seq, _ in every]
    for c, (score, _, lp) in zip(got, every):
        assert c.score == pytest.approx(score, abs=1e-10)
        assert c.logprob == pytest.approx(lp, abs=1e-10)


def test_scores_sorted_and_distinct():
    model = model_with(20, seed=2)
    out = beam_search(model, [5, 6, 7, EOS], beam_size=10)
    scores = [c.score for c in out]
    assert scores == sorted(scores, reverse=True)
    assert len({c.tokens for c in out}) == len(out) <= 10
    for c in out:
        assert c.tokens[-1] == EOS or len(c.tokens) == model.cfg.max_output_tokens - 1
        assert BOS not in c.tokens and 0 not in c.tokens


def test_bad_sizes():
    model = model_with(8)
    with pytest.raises(ValueError):
        beam_search(model, [3, EOS], beam_size=2, n_best=3)
    with pytest.raises(ValueError):
        beam_search(model, [3, EOS], beam_size=0)


class ChainModel:
    """Stub decoder: a likely chain of five 3s then EOS; any other token is followed by EOS."""
    cfg = SimpleNamespace(max_output_tokens=20)

    def eval(self):
        return self

    def encode(self, src):
        return torch.zeros(1, 1, 1), torch.zeros(1, 1, 1)

    def decode(self, tgt, memory, keys):
        rows = []
        for prefix in tgt.tolist():
            p = [1e-6] * 8
            body = prefix[1:]
            if body and body[-1] != 3:
                p[EOS] = 0.99
            elif len(body) == 0:
                p[3], p[4], p[5], p[6], p[7] = 0.6, 0.1, 0.1, 0.1, 0.1
            elif len(body) < 5:
                p[3] = 0.96
            else:
                p[EOS] = 0.96
            rows.append([math.log(x) for x in p])
        return torch.tensor(rows, dtype=torch.float64)[:, None, :].expand(-1, tgt.shape[1], -1)


def test_early_finishers_do_not_end_the_search():
    # four short hypotheses retire before the best one is complete
    model = ChainModel()
    best = (3, 3, 3, 3, 3, EOS)
    assert greedy(model, [EOS]).tokens == best
    out = beam_search(model, [EOS], beam_size=4)
    assert out[0].tokens == best
    assert {c.tokens for c in out[1:]} <= {(t, EOS) for t in (4, 5, 6, 7)}
