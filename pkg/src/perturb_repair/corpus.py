"""Training samples: assembly from raw perturbations, JSONL storage, splits."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .diagnostics import from_evidence
from .lang import ast as A
from .lang.edit import Region, region_text
from .lang.parser import parse
from .lang.printer import pretty_print, render_stmt
from .lang.scope import block_at, member_at, scope_at
from .perturber.generate import PerturbConfig, RawSample, generate_samples

CONTEXT_BEFORE = 3
CONTEXT_AFTER = 3
KEYS = ("buggy", "context", "diagnostic", "fix", "meta")


class MalformedLine(ValueError):
    def __init__(self, line: int, reason: str = ""):
        super().__init__(f"line {line}: {reason}" if reason else f"line {line}")
        self.line = line


class UnknownProgramId(KeyError):
    pass


@dataclass
class TrainingSample:
    buggy: str
    context: str
    diagnostic: str
    fix: str
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"buggy": self.buggy, "context": self.context, "diagnostic": self.diagnostic,
                "fix": self.fix, "meta": self.meta}

    @property
    def program_id(self) -> str:
        return self.meta["seed_program_id"]

    @property
    def kind(self) -> str:
        return self.meta["kind"]

    @property
    def tag(self) -> str:
        return self.meta["action"]

    @property
    def region(self) -> Region:
        return Region.from_json(self.meta["region"])

    def perturbed_program(self) -> A.Program:
        return parse(self.meta["perturbed"])


def build_context(prog: A.Program, region: Region) -> str:
    """`Class.method | name:type, ... | statements before | statements after`."""
    cls, member = member_at(prog, region.block_path)
    name = member.name if isinstance(member, A.Method) else cls.name
    info = scope_at(prog, region.block_path, region.start)
    variables = ", ".join(f"{v}:{t}" for v, t in info.variables.items())
    stmts = block_at(prog, region.block_path).stmts
    before = stmts[max(0, region.start - CONTEXT_BEFORE):region.start]
    after = stmts[region.end:region.end + CONTEXT_AFTER]
    render = lambda ss: " ".join(render_stmt(s, elide=True) for s in ss)
    return f"{cls.name}.{name} | {variables} | {render(before)} | {render(after)}"


def build_sample(raw: RawSample, round_: int = 0, seed: int = 0) -> TrainingSample:
    diag = from_evidence(raw.errors, raw.outcome)
    meta = {
        "seed_program_id": raw.program_id,
        "sample_id": f"{raw.program_id}:{round_}:{raw.target}",
        "action": raw.action.tag,
        "chain": [a.tag for a in raw.actions],
        "node_id": raw.target,
        "kind": diag.kind,
        "error": diag.key,
        "region": raw.region.to_json(),
        "perturbed": pretty_print(raw.perturbed),
        "seed": seed,
    }
    return TrainingSample(
        buggy=region_text(raw.perturbed, raw.region),
        context=build_context(raw.perturbed, raw.region),
        diagnostic=diag.rendered,
        fix=region_text(raw.original, raw.region, original=True),
        meta=meta,
    )


def generate_corpus(programs: dict, cfg: PerturbConfig, rounds: int = 1) -> list[TrainingSample]:
    """Samples from every program over `rounds` independent passes, duplicates dropped.

    `programs` maps program id to a parsed correct program; ids are visited in
    sorted order so the output does not depend on dict order.
    """
    out, seen = [], set()
    for pid in sorted(programs):
        for r in range(rounds):
            for raw in generate_samples(programs[pid], cfg, pid, r):
                sample = build_sample(raw, r, cfg.rng_seed)
                key = (pid, sample.meta["perturbed"])
                if key not in seen:
                    seen.add(key)
                    out.append(sample)
    return out


def write_jsonl(samples, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for s in samples:
            f.write(json.dumps(s.to_json(), ensure_ascii=False, sort_keys=False) + "\n")


def read_jsonl(path) -> list[TrainingSample]:
    out = []
    with open(path, encoding="utf-8") as f:
        for n, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(n, str(exc)) from None
            if not isinstance(d, dict) or tuple(sorted(d)) != tuple(sorted(KEYS)):
                raise MalformedLine(n, "expected keys " + ", ".join(KEYS))
            if not all(isinstance(d[k], str) for k in KEYS[:4]) or not isinstance(d["meta"], dict):
                raise MalformedLine(n, "bad field types")
            out.append(TrainingSample(**d))
    return out


def split_by_program(samples, held_out_ids, known_ids=None) -> tuple[list, list]:
    """(train, test) with every sample of a held-out program in test."""
    held = set(held_out_ids)
    known = set(known_ids) if known_ids is not None else {s.program_id for s in samples}
    unknown = held - known
    if unknown:
        raise UnknownProgramId(sorted(unknown)[0])
    train = [s for s in samples if s.program_id not in held]
    test = [s for s in samples if s.program_id in held]
    return train, test


def load_seed_programs(directory=None) -> dict:
    """Parsed `*.mj` programs of a directory (the bundled seeds by default), keyed by file stem."""
    directory = Path(directory) if directory is not None else Path(__file__).parent / "seeds"
    return {p.stem: parse(p.read_text(encoding="utf-8")) for p in sorted(directory.glob("*.mj"))}
