"""Top-k exact-match and plausible-match rates over a held-out corpus."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from ..tokenizer import Tokenizer
from .data import sample_input
from .repair import Validator, decode_candidates
from .transformer import Seq2Seq

DEFAULT_KS = (1, 10, 50)


def cutoffs(beam: int, ks=DEFAULT_KS) -> list[int]:
    return sorted({k for k in ks if k <= beam} | {beam})


@dataclass
class SampleResult:
    sample_id: str
    action: str
    kind: str
    exact_rank: int | None  # 1-based rank of the first exact candidate
    plausible_rank: int | None
    candidates: int

    def hit(self, rank: int | None, k: int) -> bool:
        return rank is not None and rank <= k


@dataclass
class EvalReport:
    label: str
    beam: int
    ks: list
    results: list = field(default_factory=list)

    def rate(self, which: str, k: int, subset=None) -> float | None:
        rows = [r for r in self.results if subset is None or subset(r)]
        if not rows:
            return None
        rank = (lambda r: r.exact_rank) if which == "exact" else (lambda r: r.plausible_rank)
        return sum(r.hit(rank(r), k) for r in rows) / len(rows)

    def per_sample_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "sample_id", "action", "kind", "candidates"]
                   + [f"exact@{k}" for k in self.ks] + [f"plausible@{k}" for k in self.ks])
        for r in self.results:
            w.writerow([self.label, r.sample_id, r.action, r.kind, r.candidates]
                       + [int(r.hit(r.exact_rank, k)) for k in self.ks]
                       + [int(r.hit(r.plausible_rank, k)) for k in self.ks])
        return buf.getvalue()

    def summary_rows(self) -> list[list]:
        rows = []
        for k in self.ks:
            for which in ("exact", "plausible"):
                v = self.rate(which, k)
                rows.append([self.label, which, k, len(self.results), "n/a" if v is None else f"{v:.4f}"])
        return rows


SUMMARY_HEADER = ["model", "metric", "k", "samples", "rate"]


def summary_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for rep in reports:
        w.writerows(rep.summary_rows())
    return buf.getvalue()


def evaluate_model(model: Seq2Seq, tok: Tokenizer, samples, beam: int, variant: str = "full",
                   label: str = "model", ks=DEFAULT_KS, limits=None, progress=None) -> EvalReport:
    report = EvalReport(label, beam, cutoffs(beam, ks))
    for i, s in enumerate(samples):
        src = sample_input(tok, s, model.cfg.max_input_tokens, variant)
        cands = decode_candidates(model, tok, src, beam, beam)
        check = Validator(s.perturbed_program(), s.region, limits)
        exact = plausible = None
        for rank, (text, _) in enumerate(cands, 1):
            if exact is None and text == s.fix:
                exact = rank
            if plausible is None and check(text):
                plausible = rank
            if exact is not None and plausible is not None:
                break
        report.results.append(SampleResult(s.meta.get("sample_id", str(i)), s.tag, s.kind,
                                           exact, plausible, len(cands)))
        if progress:
            progress(i + 1, len(samples))
    return report
