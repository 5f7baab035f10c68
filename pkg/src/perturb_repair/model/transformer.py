"""Encoder-decoder transformer written out from its equations.

Only tensor arithmetic and autograd come from torch; every layer is spelled
out here. All parameters are float64.
"""
from __future__ import annotations

import math

import torch
from torch import nn
from torch.nn import functional as F

from ..tokenizer import PAD
from .config import ModelConfig

DTYPE = torch.float64
NEG_INF = float("-inf")


class ShapeMismatch(ValueError):
    pass


def _param(*shape) -> nn.Parameter:
    return nn.Parameter(torch.zeros(*shape, dtype=DTYPE))


class LayerNorm(nn.Module):
    def __init__(self, d: int, eps: float = 1e-6):
        super().__init__()
        self.gain = nn.Parameter(torch.ones(d, dtype=DTYPE))
        self.bias = _param(d)
        self.eps = eps

    def forward(self, x):
        mean = x.mean(-1, keepdim=True)
        var = ((x - mean) ** 2).mean(-1, keepdim=True)
        return self.gain * (x - mean) / torch.sqrt(var + self.eps) + self.bias


class Attention(nn.Module):
    """Multi-head scaled dot-product attention.

    `allowed` is a boolean (batch, queries, keys) mask; each query attends
    to the allowed keys with weights softmax(q.k / sqrt(d_head)).
    """

    def __init__(self, d: int, heads: int):
        super().__init__()
        self.d, self.heads, self.dh = d, heads, d // heads
        self.wq, self.wk, self.wv, self.wo = (_param(d, d) for _ in range(4))
        self.bq, self.bk, self.bv, self.bo = (_param(d) for _ in range(4))
        self.last_weights = None

    def split(self, x):
        b, t, _ = x.shape
        return x.view(b, t, self.heads, self.dh).transpose(1, 2)

    def forward(self, query, memory, allowed, keep_weights: bool = False):
        if query.shape[-1] != self.d or memory.shape[-1] != self.d:
            raise ShapeMismatch(f"expected width {self.d}")
        q = self.split(query @ self.wq + self.bq)
        k = self.split(memory @ self.wk + self.bk)
        v = self.split(memory @ self.wv + self.bv)
        scores = q @ k.transpose(-1, -2) / math.sqrt(self.dh)
        scores = scores.masked_fill(~allowed[:, None, :, :], NEG_INF)
        weights = torch.softmax(scores, dim=-1)
        if keep_weights:
            self.last_weights = weights.detach()
        out = (weights @ v).transpose(1, 2).reshape(query.shape[0], query.shape[1], self.d)
        return out @ self.wo + self.bo


class FeedForward(nn.Module):
    def __init__(self, d: int, hidden: int):
        super().__init__()
        self.w1, self.b1 = _param(d, hidden), _param(hidden)
        self.w2, self.b2 = _param(hidden, d), _param(d)

    def forward(self, x):
        return torch.relu(x @ self.w1 + self.b1) @ self.w2 + self.b2


class EncoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.attn = Attention(cfg.d_model, cfg.num_heads)
        self.norm1 = LayerNorm(cfg.d_model)
        self.ffn = FeedForward(cfg.d_model, cfg.ffn_dim)
        self.norm2 = LayerNorm(cfg.d_model)
        self.dropout = cfg.dropout

    def forward(self, x, allowed):
        drop = lambda t: F.dropout(t, self.dropout, self.training)
        x = self.norm1(x + drop(self.attn(x, x, allowed)))
        return self.norm2(x + drop(self.ffn(x)))


class DecoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.self_attn = Attention(cfg.d_model, cfg.num_heads)
        self.norm1 = LayerNorm(cfg.d_model)
        self.cross_attn = Attention(cfg.d_model, cfg.num_heads)
        self.norm2 = LayerNorm(cfg.d_model)
        self.ffn = FeedForward(cfg.d_model, cfg.ffn_dim)
        self.norm3 = LayerNorm(cfg.d_model)
        self.dropout = cfg.dropout

    def forward(self, y, memory, self_allowed, cross_allowed):
        drop = lambda t: F.dropout(t, self.dropout, self.training)
        y = self.norm1(y + drop(self.self_attn(y, y, self_allowed)))
        y = self.norm2(y + drop(self.cross_attn(y, memory, cross_allowed)))
        return self.norm3(y + drop(self.ffn(y)))


def positional_encoding(length: int, d: int) -> torch.Tensor:
    pos = torch.arange(length, dtype=DTYPE)[:, None]
    i = torch.arange(0, d, 2, dtype=DTYPE)
    angle = pos / torch.pow(torch.tensor(10000.0, dtype=DTYPE), i / d)
    pe = torch.zeros(length, d, dtype=DTYPE)
    pe[:, 0::2] = torch.sin(angle)
    pe[:, 1::2] = torch.cos(angle)[:, : d // 2]
    return pe


class Seq2Seq(nn.Module):
    """Token ids in, next-token logits out; the output projection reuses the embedding."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.embed = _param(cfg.vocab_size, cfg.d_model)
        self.encoder = nn.ModuleList(EncoderLayer(cfg) for _ in range(cfg.encoder_layers))
        self.decoder = nn.ModuleList(DecoderLayer(cfg) for _ in range(cfg.decoder_layers))
        longest = max(cfg.max_input_tokens, cfg.max_output_tokens) + 1
        self.register_buffer("pe", positional_encoding(longest, cfg.d_model), persistent=False)
        self.reset_parameters()

    def reset_parameters(self) -> None:
        gen = torch.Generator().manual_seed(self.cfg.seed)
        with torch.no_grad():
            for name, p in self.named_parameters():
                if name == "embed":
                    p.normal_(0.0, self.cfg.d_model ** -0.5, generator=gen)
                elif p.dim() == 2:
                    bound = math.sqrt(6.0 / (p.shape[0] + p.shape[1]))
                    p.uniform_(-bound, bound, generator=gen)

    def embed_tokens(self, ids):
        x = self.embed[ids] * math.sqrt(self.cfg.d_model) + self.pe[: ids.shape[1]]
        return F.dropout(x, self.cfg.dropout, self.training)

    def encode(self, src):
        """Encoder states and the (batch, 1, src_len) key mask for cross-attention."""
        if src.dim() != 2:
            raise ShapeMismatch("source ids must be (batch, length)")
        keys = (src != PAD)[:, None, :]
        x = self.embed_tokens(src)
        allowed = keys.expand(-1, src.shape[1], -1)
        for layer in self.encoder:
            x = layer(x, allowed)
        return x, keys

    def decode(self, tgt, memory, keys):
        """Logits (batch, tgt_len, vocab); position i sees target tokens 0..i only."""
        if tgt.dim() != 2 or memory.shape[0] != tgt.shape[0]:
            raise ShapeMismatch("target ids must be (batch, length) matching the memory batch")
        t = tgt.shape[1]
        causal = torch.tril(torch.ones(t, t, dtype=torch.bool))
        self_allowed = causal[None] & (tgt != PAD)[:, None, :] | torch.eye(t, dtype=torch.bool)[None]
        cross_allowed = keys.expand(-1, t, -1)
        y = self.embed_tokens(tgt)
        for layer in self.decoder:
            y = layer(y, memory, self_allowed, cross_allowed)
        return y @ self.embed.T

    def forward(self, src, tgt_in):
        memory, keys = self.encode(src)
        return self.decode(tgt_in, memory, keys)
