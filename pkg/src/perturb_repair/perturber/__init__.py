"""Perturbation actions and the sample generator."""
from .actions import TAGS, CandidateIndex, IllegalAction, PerturbationAction, apply, apply_with_region, enumerate_candidates
from .generate import NotCorrectProgram, PerturbConfig, RawSample, evaluate, generate_samples

__all__ = [
    "TAGS", "CandidateIndex", "IllegalAction", "PerturbationAction", "apply", "apply_with_region",
    "enumerate_candidates", "NotCorrectProgram", "PerturbConfig", "RawSample", "evaluate", "generate_samples",
]
