"""Teacher-forced training with token-level cross-entropy."""
from __future__ import annotations

import copy
import logging
import math
import random
from dataclasses import dataclass, field

import torch
from torch.nn import functional as F

from ..tokenizer import PAD
from .config import ModelConfig, TrainConfig
from .data import EmptyDataset, collate
from .transformer import Seq2Seq

log = logging.getLogger(__name__)


class NonFiniteLoss(RuntimeError):
    pass


def batch_loss(model: Seq2Seq, batch) -> tuple[torch.Tensor, int]:
    """Summed cross-entropy over non-pad target tokens, and their count."""
    src, tgt_in, tgt_out = batch
    logits = model(src, tgt_in)
    loss = F.cross_entropy(logits.reshape(-1, logits.shape[-1]), tgt_out.reshape(-1),
                           ignore_index=PAD, reduction="sum")
    return loss, int((tgt_out != PAD).sum())


def batches(examples, size: int):
    for i in range(0, len(examples), size):
        yield collate(examples[i:i + size])


@torch.no_grad()
def dataset_loss(model: Seq2Seq, examples, batch_size: int = 32) -> float:
    was = model.training
    model.eval()
    total, count = 0.0, 0
    for b in batches(examples, batch_size):
        loss, n = batch_loss(model, b)
        total, count = total + float(loss), count + n
    model.train(was)
    return total / max(count, 1)


@torch.no_grad()
def token_accuracy(model: Seq2Seq, examples, batch_size: int = 32) -> float:
    """Fraction of target tokens predicted exactly under teacher forcing."""
    was = model.training
    model.eval()
    right = total = 0
    for src, tgt_in, tgt_out in batches(examples, batch_size):
        pred = model(src, tgt_in).argmax(-1)
        mask = tgt_out != PAD
        right += int(((pred == tgt_out) & mask).sum())
        total += int(mask.sum())
    model.train(was)
    return right / max(total, 1)


def epoch_batches(examples, order: list, size: int, rng: random.Random, pool: int = 50) -> list[list]:
    """Shuffled batches of similar input length, to keep padding small.

    The shuffled order is cut into pools of `pool` batches; each pool is
    sorted by input length and sliced, then the batch order is shuffled.
    """
    rng.shuffle(order)
    out = []
    span = size * pool
    for i in range(0, len(order), span):
        chunk = sorted(order[i:i + span], key=lambda j: len(examples[j].src))
        out.extend(chunk[k:k + size] for k in range(0, len(chunk), size))
    rng.shuffle(out)
    return out


def schedule(step: int, warmup: int) -> float:
    """Linear warmup, then decay with the inverse square root of the step."""
    step = max(step, 1)
    warmup = max(warmup, 1)
    return min(step / warmup, math.sqrt(warmup / step))


@dataclass
class TrainResult:
    model: Seq2Seq
    losses: list  # (epoch, mean token loss); epoch 0 is before any update
    valid_losses: list = field(default_factory=list)  # same shape, on the validation examples
    best_epoch: int | None = None  # epoch whose weights were kept, when validating


def train(examples, cfg: ModelConfig, tcfg: TrainConfig, progress=None, model: Seq2Seq | None = None,
          validation=None) -> TrainResult:
    """Teacher-forced training.

    With `validation` examples, the weights of the epoch with the lowest
    validation loss are returned; `tcfg.patience` > 0 also stops training
    after that many epochs without improvement.
    """
    if not examples:
        raise EmptyDataset("no training examples")
    torch.manual_seed(tcfg.seed)
    model = model or Seq2Seq(cfg)
    model.train()
    opt = torch.optim.Adam(model.parameters(), lr=tcfg.learning_rate, betas=(0.9, 0.98), eps=1e-9)
    sched = torch.optim.lr_scheduler.LambdaLR(opt, lambda s: schedule(s + 1, tcfg.warmup_steps))
    order = list(range(len(examples)))
    rng = random.Random(tcfg.seed)
    losses = [(0, dataset_loss(model, examples))]
    valid, best, best_state = [], None, None
    if validation:
        valid.append((0, dataset_loss(model, validation)))
        best, best_state = 0, copy.deepcopy(model.state_dict())
    for epoch in range(1, tcfg.epochs + 1):
        total, count = 0.0, 0
        for idx in epoch_batches(examples, order, tcfg.batch_size, rng):
            batch = collate([examples[j] for j in idx])
            loss, n = batch_loss(model, batch)
            if not torch.isfinite(loss):
                raise NonFiniteLoss(f"epoch {epoch}: loss {loss.item()}")
            opt.zero_grad()
            (loss / n).backward()
            if tcfg.clip_norm > 0:
                torch.nn.utils.clip_grad_norm_(model.parameters(), tcfg.clip_norm)
            opt.step()
            sched.step()
            total, count = total + loss.item(), count + n
        losses.append((epoch, total / count))
        if progress:
            progress(epoch, total / count)
        log.info("epoch %d loss %.6f", epoch, total / count)
        if validation:
            valid.append((epoch, dataset_loss(model, validation)))
            log.info("epoch %d validation loss %.6f", epoch, valid[-1][1])
            if valid[-1][1] < valid[best][1]:
                best, best_state = epoch, copy.deepcopy(model.state_dict())
            elif tcfg.patience and epoch - best >= tcfg.patience:
                break
    if validation:
        model.load_state_dict(best_state)
    model.eval()
    return TrainResult(model, losses, valid, best if validation else None)
