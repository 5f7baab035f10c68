"""Transformer checks against a scalar pure-Python re-derivation of the forward pass."""
import random

import pytest
import torch

from perturb_repair.model import ModelConfig, Seq2Seq, ShapeMismatch, TrainConfig
from perturb_repair.model.data import Example, collate
from perturb_repair.model.train import EmptyDataset, NonFiniteLoss, batch_loss, dataset_loss, epoch_batches, train
from perturb_repair.tokenizer import BOS, EOS, PAD

import oracles
from oracles import oracle_logits

TINY = ModelConfig(vocab_size=12, encoder_layers=2, decoder_layers=2, d_model=4, num_heads=2,
                   ffn_dim=6, max_input_tokens=8, max_output_tokens=6, seed=3)


def randomized(cfg=TINY, seed=11):
    return oracles.randomized(cfg, seed)


@pytest.mark.parametrize("src,tgt", [
    ([5, 6, 7, EOS], [BOS, 4, 9]),
    ([8, 3, EOS, PAD, PAD], [BOS, 11, PAD]),
    ([9], [BOS]),
])
def test_forward_matches_scalar_oracle(src, tgt):
    model = randomized()
    got = model(torch.tensor([src]), torch.tensor([tgt]))[0].tolist()
    want = oracle_logits(model, src, tgt)
    worst = max(abs(a - b) for r1, r2 in zip(got, want) for a, b in zip(r1, r2))
    assert worst <= 1e-10


def test_batched_rows_match_single_rows():
    model = randomized()
    a, b = [5, 6, 7, EOS], [8, 3, EOS, PAD]
    both = model(torch.tensor([a, b]), torch.tensor([[BOS, 4], [BOS, 9]]))
    one = model(torch.tensor([b[:3]]), torch.tensor([[BOS, 9]]))
    assert torch.allclose(both[1], one[0], atol=1e-12, rtol=0)


def test_attention_rows_sum_to_one():
    model = randomized()
    src = torch.tensor([[5, 6, 7, EOS, PAD]])
    x = model.embed_tokens(src)
    allowed = (src != PAD)[:, None, :].expand(-1, 5, -1)
    model.encoder[0].attn(x, x, allowed, keep_weights=True)
    w = model.encoder[0].attn.last_weights
    assert torch.allclose(w.sum(-1), torch.ones_like(w.sum(-1)), atol=1e-12)
    assert float(w[..., 4].abs().max()) == 0.0


def test_single_token_attention_is_value_projection():
    att = randomized().decoder[0].self_attn
    x = torch.randn(1, 1, 4, dtype=torch.float64)
    out = att(x, x, torch.ones(1, 1, 1, dtype=torch.bool))
    want = (x @ att.wv + att.bv) @ att.wo + att.bo
    assert torch.allclose(out, want, atol=1e-12)


def test_decoder_is_causal():
    model = randomized()
    src = torch.tensor([[5, 6, EOS]])
    base = model(src, torch.tensor([[BOS, 4, 9, 10]]))
    changed = model(src, torch.tensor([[BOS, 4, 7, 2]]))
    assert torch.equal(base[0, :2], changed[0, :2])
    assert not torch.allclose(base[0, 2], changed[0, 2])


def test_shape_errors():
    model = randomized()
    with pytest.raises(ShapeMismatch):
        model.encode(torch.tensor([1, 2]))
    memory, keys = model.encode(torch.tensor([[5, 6]]))
    with pytest.raises(ShapeMismatch):
        model.decode(torch.tensor([[BOS], [BOS]]), memory, keys)


def test_gradients_match_finite_differences():
    model = randomized(seed=5)
    batch = collate([Example([5, 6, 7, EOS], [BOS, 4, 9, EOS]), Example([8, EOS], [BOS, 10, EOS])])

    def loss():
        total, n = batch_loss(model, batch)
        return total / n

    model.zero_grad()
    loss().backward()
    params = [(name, p) for name, p in model.named_parameters()]
    rng = random.Random(0)
    picks = [(name, p, tuple(rng.randrange(s) for s in p.shape))
             for name, p in (rng.choice(params) for _ in range(50))]
    h = 1e-5
    for name, p, idx in picks:
        with torch.no_grad():
            orig = float(p[idx])
            p[idx] = orig + h
            up = float(loss())
            p[idx] = orig - h
            down = float(loss())
            p[idx] = orig
        numeric = (up - down) / (2 * h)
        analytic = float(p.grad[idx])
        rel = abs(numeric - analytic) / max(abs(numeric), abs(analytic), 1e-6)
        assert rel <= 1e-4, (name, idx, numeric, analytic)


def test_same_seed_same_init():
    a, b = Seq2Seq(TINY), Seq2Seq(TINY)
    for (n, p), (_, q) in zip(a.named_parameters(), b.named_parameters()):
        assert torch.equal(p, q), n
    c = Seq2Seq(ModelConfig(**{**TINY.to_json(), "seed": 4}))
    assert not torch.equal(a.embed, c.embed)


def _toy_examples():
    rng = random.Random(1)
    out = []
    for _ in range(24):
        src = [rng.randrange(8, 12) for _ in range(3)]
        out.append(Example(src + [EOS], [BOS] + src[::-1] + [EOS]))
    return out


def test_training_reduces_loss_and_is_deterministic():
    tcfg = TrainConfig(epochs=2, batch_size=8, learning_rate=5e-3, warmup_steps=2, seed=0)
    r1 = train(_toy_examples(), TINY, tcfg)
    r2 = train(_toy_examples(), TINY, tcfg)
    assert r1.losses == r2.losses
    assert r1.losses[0][0] == 0 and r1.losses[1][1] < r1.losses[0][1]
    for p, q in zip(r1.model.parameters(), r2.model.parameters()):
        assert torch.equal(p, q)


def test_non_finite_loss_aborts():
    model = Seq2Seq(TINY)
    with torch.no_grad():
        model.embed[5, 0] = float("nan")
    with pytest.raises(NonFiniteLoss):
        train(_toy_examples(), TINY, TrainConfig(epochs=1), model=model)
    with pytest.raises(EmptyDataset):
        train([], TINY, TrainConfig(epochs=1))


def test_validation_keeps_best_epoch():
    examples = _toy_examples()
    # targets drawn from tokens training never emits: validation loss turns upward
    rng = random.Random(9)
    validation = [Example(e.src, [BOS] + [rng.randrange(4, 8) for _ in range(3)] + [EOS]) for e in examples[:8]]
    tcfg = TrainConfig(epochs=12, batch_size=8, learning_rate=1e-2, warmup_steps=2, seed=0)
    result = train(examples, TINY, tcfg, validation=validation)
    values = [v for _, v in result.valid_losses]
    assert [e for e, _ in result.valid_losses] == list(range(tcfg.epochs + 1))
    assert result.best_epoch == values.index(min(values))
    assert dataset_loss(result.model, validation) == pytest.approx(min(values), abs=1e-12)
    patient = train(examples, TINY, TrainConfig(**{**tcfg.to_json(), "patience": 2}), validation=validation)
    last = patient.losses[-1][0]
    assert last - patient.best_epoch == 2 and last < tcfg.epochs


def test_epoch_batches_partition_by_length():
    examples = [Example([EOS] * n, [BOS, EOS]) for n in (5, 1, 9, 3, 7, 2, 8, 4, 6, 10, 11)]
    rng = random.Random(0)
    got = epoch_batches(examples, list(range(len(examples))), 3, rng, pool=2)
    assert sorted(i for b in got for i in b) == list(range(len(examples)))
    assert all(1 <= len(b) <= 3 for b in got)
    for b in got:
        lengths = [len(examples[i].src) for i in b]
        assert lengths == sorted(lengths)


def test_config_round_trip():
    assert ModelConfig.from_json(TINY.to_json()) == TINY
