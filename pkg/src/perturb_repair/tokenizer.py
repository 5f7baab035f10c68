"""Byte-level byte-pair-encoding tokenizer.

Ids 0-7 are reserved specials, ids 8-263 are the 256 single bytes, and every
later id is a learned merge of two earlier ids.
"""
from __future__ import annotations

import heapq
import re
from collections import Counter, defaultdict
from pathlib import Path

SPECIALS = ("[PAD]", "[BOS]", "[EOS]", "[UNK]", "[CE]", "[FE]", "[BUG]", "[CONTEXT]")
PAD, BOS, EOS, UNK, CE, FE, BUG, CONTEXT = range(8)
BYTE_OFFSET = len(SPECIALS)
BASE_SIZE = BYTE_OFFSET + 256
DEFAULT_VOCAB_SIZE = 4000

# specials that may occur inside text and always encode atomically
_TEXT_SPECIALS = {s: i for i, s in enumerate(SPECIALS) if i >= CE}
_SPECIAL_RX = re.compile("(" + "|".join(re.escape(s) for s in _TEXT_SPECIALS) + ")")
# merges stay inside whitespace-delimited words and never join across `_`,
# so GET_FACTORS always splits into GET, _, FACTORS; a single leading space
# attaches to the word after it
_WORD_RX = re.compile(r" ?[^\s_]+| ?_+|\s+")


class CorpusTooSmall(ValueError):
    pass


class UnknownId(KeyError):
    pass


def pretokenize(text: str) -> list[str]:
    return _WORD_RX.findall(text)


def escape(b: bytes) -> str:
    out = []
    for c in b:
        if c == 0x5C:
            out.append("\\\\")
        elif 0x21 <= c <= 0x7E:
            out.append(chr(c))
        else:
            out.append(f"\\x{c:02x}")
    return "".join(out)


def unescape(s: str) -> bytes:
    out, i = bytearray(), 0
    while i < len(s):
        if s[i] == "\\":
            if s[i + 1] == "\\":
                out.append(0x5C)
                i += 2
            else:
                out.append(int(s[i + 2:i + 4], 16))
                i += 4
        else:
            out.append(ord(s[i]))
            i += 1
    return bytes(out)


class Tokenizer:
    def __init__(self, merges: list[tuple[int, int]]):
        self.merges = [tuple(m) for m in merges]
        self.ranks = {m: BASE_SIZE + r for r, m in enumerate(self.merges)}
        self.pieces: list[bytes] = [s.encode() for s in SPECIALS] + [bytes([b]) for b in range(256)]
        for a, b in self.merges:
            self.pieces.append(self.pieces[a] + self.pieces[b])
        self._cache: dict[str, list[int]] = {}

    @property
    def size(self) -> int:
        return len(self.pieces)

    # ---- training -----------------------------------------------------

    @classmethod
    def train(cls, texts, size: int = DEFAULT_VOCAB_SIZE) -> "Tokenizer":
        """Learn merges until the vocabulary has exactly `size` entries.

        The most frequent adjacent pair is merged first; equal counts go to
        the pair whose byte strings sort first.
        """
        if size < BASE_SIZE:
            raise CorpusTooSmall(f"size {size} is below the {BASE_SIZE} base entries")
        if isinstance(texts, str):
            texts = [texts]
        freq = Counter()
        for t in texts:
            for part in _SPECIAL_RX.split(t):
                if part not in _TEXT_SPECIALS:
                    freq.update(pretokenize(part))
        words = [[b + BYTE_OFFSET for b in w.encode()] for w in sorted(freq)]
        counts = [freq[w] for w in sorted(freq)]
        pieces = [s.encode() for s in SPECIALS] + [bytes([b]) for b in range(256)]

        pair_count: Counter = Counter()
        where: dict = defaultdict(set)
        for wi, w in enumerate(words):
            for p in zip(w, w[1:]):
                pair_count[p] += counts[wi]
                where[p].add(wi)
        heap = [(-c, pieces[a], pieces[b], (a, b)) for (a, b), c in pair_count.items()]
        heapq.heapify(heap)
        merges = []
        while len(pieces) < size:
            while heap:
                negc, _, _, pair = heap[0]
                if pair_count.get(pair, 0) == -negc and negc < 0:
                    break
                heapq.heappop(heap)
            if not heap:
                raise CorpusTooSmall(f"corpus supports only {len(pieces)} entries, {size} requested")
            heapq.heappop(heap)
            a, b = pair
            new = len(pieces)
            pieces.append(pieces[a] + pieces[b])
            merges.append(pair)
            touched = Counter()
            for wi in sorted(where.pop(pair, ())):
                w, c = words[wi], counts[wi]
                for p in zip(w, w[1:]):
                    touched[p] -= c
                merged, i = [], 0
                while i < len(w):
                    if i + 1 < len(w) and w[i] == a and w[i + 1] == b:
                        merged.append(new)
                        i += 2
                    else:
                        merged.append(w[i])
                        i += 1
                words[wi] = merged
                for p in zip(merged, merged[1:]):
                    touched[p] += c
                    where[p].add(wi)
            for p, delta in touched.items():
                if delta:
                    pair_count[p] += delta
                    if pair_count[p] <= 0:
                        del pair_count[p]
                    else:
                        heapq.heappush(heap, (-pair_count[p], pieces[p[0]], pieces[p[1]], p))
            pair_count.pop(pair, None)
        return cls(merges)

    # ---- encoding -----------------------------------------------------

    def _encode_word(self, word: str) -> list[int]:
        ids = self._cache.get(word)
        if ids is not None:
            return ids
        ids = [b + BYTE_OFFSET for b in word.encode()]
        while len(ids) > 1:
            best = min(range(len(ids) - 1), key=lambda i: self.ranks.get((ids[i], ids[i + 1]), 1 << 62))
            rank = self.ranks.get((ids[best], ids[best + 1]))
            if rank is None:
                break
            pair = (ids[best], ids[best + 1])
            merged, i = [], 0
            while i < len(ids):
                if i + 1 < len(ids) and (ids[i], ids[i + 1]) == pair:
                    merged.append(rank)
                    i += 2
                else:
                    merged.append(ids[i])
                    i += 1
            ids = merged
        self._cache[word] = ids
        return ids

    def encode(self, text: str) -> list[int]:
        out = []
        for part in _SPECIAL_RX.split(text):
            if part in _TEXT_SPECIALS:
                out.append(_TEXT_SPECIALS[part])
            elif part:
                for w in pretokenize(part):
                    out.extend(self._encode_word(w))
        return out

    def decode(self, ids) -> str:
        buf = bytearray()
        for i in ids:
            i = int(i)
            if not 0 <= i < len(self.pieces):
                raise UnknownId(i)
            buf += self.pieces[i]
        return buf.decode("utf-8", errors="replace")

    def decode_fix(self, ids) -> str:
        """Decode model output, skipping framing tokens and stopping at EOS."""
        kept = []
        for i in ids:
            if i == EOS:
                break
            if i not in (PAD, BOS):
                kept.append(i)
        return self.decode(kept)

    def piece(self, i: int) -> str:
        return escape(self.pieces[i]) if i >= BYTE_OFFSET else SPECIALS[i]

    # ---- files --------------------------------------------------------

    def vocab_lines(self) -> list[str]:
        return [f"{i}\t{self.piece(i)}" for i in range(self.size)]

    def merge_lines(self) -> list[str]:
        return [f"{a} {b}" for a, b in self.merges]

    def save(self, vocab_path, merges_path=None) -> None:
        vocab_path = Path(vocab_path)
        merges_path = Path(merges_path) if merges_path else vocab_path.with_suffix(".merges")
        vocab_path.write_text("\n".join(self.vocab_lines()) + "\n", encoding="utf-8")
        merges_path.write_text("\n".join(self.merge_lines()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, vocab_path, merges_path=None) -> "Tokenizer":
        vocab_path = Path(vocab_path)
        merges_path = Path(merges_path) if merges_path else vocab_path.with_suffix(".merges")
        merges = [tuple(int(x) for x in line.split()) for line in
                  merges_path.read_text(encoding="utf-8").splitlines() if line.strip()]
        tok = cls(merges)
        for line in vocab_path.read_text(encoding="utf-8").splitlines():
            i, piece = line.split("\t", 1)
            if tok.piece(int(i)) != piece:
                raise ValueError(f"vocab entry {i} disagrees with the merges file")
        return tok
