"""Turning one correct program into validated buggy variants."""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from ..executor.checker import CheckError, check_with_types
from ..executor.interpreter import ExecLimits, TestOutcome, first_failure, run_tests
from ..lang import ast as A
from ..lang.edit import Region
from ..lang.scope import block_at, iter_statements
from .actions import REPLACEMENTS, CandidateIndex, IllegalAction, PerturbationAction, apply_with_region


GEN_MAX_STEPS = 20_000


class NotCorrectProgram(ValueError):
    pass


@dataclass(frozen=True)
class PerturbConfig:
    max_attempts: int = 20
    rng_seed: int = 0
    chain_probability: float = 0.15
    # seed tests need a few hundred steps; a tight budget keeps looping mutants cheap
    limits: ExecLimits = field(default_factory=lambda: ExecLimits(max_steps=GEN_MAX_STEPS))

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")
        if not 0.0 <= self.chain_probability <= 1.0:
            raise ValueError("chain_probability must lie in [0, 1]")


@dataclass
class RawSample:
    program_id: str
    original: A.Program
    perturbed: A.Program
    actions: list  # PerturbationAction, the first one is the primary action
    region: Region
    errors: list  # CheckError, empty for FE samples
    outcome: TestOutcome | None  # the first failing test for FE samples
    target: int  # NodeId of the perturbed statement in `original`

    @property
    def kind(self) -> str:
        return "CE" if self.errors else "FE"

    @property
    def action(self) -> PerturbationAction:
        return self.actions[0]


def statement_rng(seed: int, program_id: str, node_id: int, round_: int = 0) -> random.Random:
    """Independent stream per statement, so statement order does not matter."""
    key = f"{seed}:{program_id}:{round_}:{node_id}".encode()
    return random.Random(int.from_bytes(hashlib.sha256(key).digest()[:8], "little"))


def pick_action(candidates: list, rng: random.Random) -> PerturbationAction:
    """Uniform over action kinds present, then uniform within the kind."""
    kinds = sorted({c.tag for c in candidates}, key=lambda t: int(t[1:]))
    tag = rng.choice(kinds)
    return rng.choice([c for c in candidates if c.tag == tag])


def _chain(prog: A.Program, region: Region, rng: random.Random) -> PerturbationAction | None:
    stmt = block_at(prog, region.block_path).stmts[region.start]
    options = [c for c in CandidateIndex(prog).candidates(stmt.id) if c.tag in REPLACEMENTS and c.tag != "P8"]
    return pick_action(options, rng) if options else None


def evaluate(prog: A.Program, limits: ExecLimits | None = None) -> tuple[list[CheckError], TestOutcome | None]:
    """Check errors, or else the first failing test (None when everything passes)."""
    errors, types = check_with_types(prog)
    if errors:
        return errors, None
    return [], first_failure(run_tests(prog, limits, stop_at_first_failure=True, types=types))


def perturb_statement(prog, index, program_id, target, cfg, round_=0) -> RawSample | None:
    rng = statement_rng(cfg.rng_seed, program_id, target, round_)
    candidates = index.candidates(target)
    if not candidates:
        return None
    for _ in range(cfg.max_attempts):
        action = pick_action(candidates, rng)
        chain = rng.random() < cfg.chain_probability
        try:
            perturbed, region = apply_with_region(prog, action)
        except IllegalAction:
            continue
        actions = [action]
        if chain and action.tag in REPLACEMENTS and action.tag != "P8":
            second = _chain(perturbed, region, rng)
            if second is not None:
                try:
                    perturbed = apply_with_region(perturbed, second)[0]
                    actions.append(second)
                except IllegalAction:
                    pass
        errors, failure = evaluate(perturbed, cfg.limits)
        if errors or failure is not None:
            return RawSample(program_id, prog, perturbed, actions, region, errors, failure, target)
    return None


def generate_samples(prog: A.Program, cfg: PerturbConfig, program_id: str = "program",
                     round_: int = 0) -> list[RawSample]:
    """At most one validated buggy variant per non-test statement of `prog`."""
    errors, failure = evaluate(prog, cfg.limits)
    if errors or failure is not None:
        raise NotCorrectProgram(program_id)
    index = CandidateIndex(prog)
    samples = []
    for loc in iter_statements(prog, include_tests=False):
        sample = perturb_statement(prog, index, program_id, loc.stmt.id, cfg, round_)
        if sample is not None:
            samples.append(sample)
    return samples
