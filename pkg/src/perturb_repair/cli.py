"""`perturb-repair` command line: gen, train, repair, eval, stats.

Exit codes: 0 success, 1 I/O or internal error, 2 invalid input, 3 no
plausible patch found.
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from pathlib import Path

from . import corpus as C
from .diagnostics import distribution_report
from .executor.interpreter import ExecLimits
from .lang.lexer import ParseError
from .lang.parser import parse
from .lang.scope import UnknownNode
from .model import VARIANTS, ModelConfig, TrainConfig
from .perturber.generate import GEN_MAX_STEPS, NotCorrectProgram, PerturbConfig
from .tokenizer import DEFAULT_VOCAB_SIZE, CorpusTooSmall, Tokenizer

log = logging.getLogger("perturb_repair")

EXIT_OK, EXIT_IO, EXIT_INPUT, EXIT_NO_PATCH = 0, 1, 2, 3


class UsageError(Exception):
    """Invalid input: reported and mapped to exit code 2."""


# Every tunable, with its type and default; config files and flags share these names.
SETTINGS = {
    # generation
    "rounds": (int, 2),
    "max_attempts": (int, 20),
    "chain_probability": (float, 0.15),
    "max_steps": (int, GEN_MAX_STEPS),
    # tokenizer
    "vocab_size": (int, DEFAULT_VOCAB_SIZE),
    # model
    "encoder_layers": (int, 2),
    "decoder_layers": (int, 2),
    "d_model": (int, 64),
    "num_heads": (int, 4),
    "ffn_dim": (int, 256),
    "max_input_tokens": (int, 768),
    "max_output_tokens": (int, 128),
    "dropout": (float, 0.0),
    # training
    "epochs": (int, 15),
    "batch_size": (int, 16),
    "learning_rate": (float, 2e-3),
    "warmup_steps": (int, 100),
    "clip_norm": (float, 1.0),
    "patience": (int, 0),
    # decoding
    "beam": (int, 10),
    "n": (int, 10),
    "variant": (str, "full"),
    "seed": (int, 0),
}


def read_config(path) -> dict:
    """Flat `key = value` file; `#` starts a comment line."""
    text = Path(path).read_text(encoding="utf-8")
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    try:
        parser.read_string("[settings]\n" + text)
    except configparser.Error as exc:
        raise UsageError(f"{path}: {exc}") from None
    out = {}
    for key, raw in parser["settings"].items():
        key = key.replace("-", "_")
        if key not in SETTINGS:
            raise UsageError(f"{path}: unknown setting {key!r}")
        kind = SETTINGS[key][0]
        try:
            out[key] = kind(raw)
        except ValueError:
            raise UsageError(f"{path}: {key} = {raw!r} is not a valid {kind.__name__}") from None
    return out


def settings(args) -> dict:
    """Defaults, overridden by the config file, overridden by flags."""
    merged = {k: default for k, (_, default) in SETTINGS.items()}
    if args.config:
        merged.update(read_config(args.config))
    for key in SETTINGS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if merged["variant"] not in VARIANTS:
        raise UsageError(f"unknown variant {merged['variant']!r}")
    return merged


def model_config(s: dict, vocab_size: int) -> ModelConfig:
    return ModelConfig(vocab_size=vocab_size, encoder_layers=s["encoder_layers"],
                       decoder_layers=s["decoder_layers"], d_model=s["d_model"],
                       num_heads=s["num_heads"], ffn_dim=s["ffn_dim"],
                       max_input_tokens=s["max_input_tokens"], max_output_tokens=s["max_output_tokens"],
                       dropout=s["dropout"], seed=s["seed"])


def train_config(s: dict) -> TrainConfig:
    return TrainConfig(epochs=s["epochs"], batch_size=s["batch_size"], learning_rate=s["learning_rate"],
                       warmup_steps=s["warmup_steps"], clip_norm=s["clip_norm"], patience=s["patience"],
                       seed=s["seed"])


def with_suffix(path: Path, suffix: str) -> Path:
    """`out/corpus.jsonl` + `.stats.csv` -> `out/corpus.stats.csv`."""
    return path.with_name(path.stem + suffix)


def write_stats(samples, prefix: Path) -> None:
    from .report import error_histogram_figure
    hist = distribution_report(s.diagnostic for s in samples)
    with_suffix(prefix, ".stats.csv").write_text(hist.to_csv(), encoding="utf-8")
    error_histogram_figure(hist, with_suffix(prefix, ".stats.png"))
    return hist


# ---- commands -----------------------------------------------------------

def cmd_gen(args, s) -> int:
    programs = C.load_seed_programs(args.seeds) if args.seeds else C.load_seed_programs()
    if not programs:
        raise UsageError(f"no seed programs (*.mj) in {args.seeds}")
    cfg = PerturbConfig(max_attempts=s["max_attempts"], rng_seed=s["seed"],
                        chain_probability=s["chain_probability"],
                        limits=ExecLimits(max_steps=s["max_steps"]))
    try:
        samples = C.generate_corpus(programs, cfg, rounds=s["rounds"])
    except NotCorrectProgram as exc:
        raise UsageError(f"seed program {exc} does not pass its own tests") from None
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    C.write_jsonl(samples, out)
    hist = write_stats(samples, out)
    manifest = {"seed": s["seed"], "rounds": s["rounds"], "max_attempts": s["max_attempts"],
                "chain_probability": s["chain_probability"], "max_steps": s["max_steps"],
                "programs": sorted(programs), "samples": len(samples), "kinds": hist.totals}
    if args.held_out:
        train, test = C.split_by_program(samples, args.held_out, programs)
        C.write_jsonl(train, with_suffix(out, ".train.jsonl"))
        C.write_jsonl(test, with_suffix(out, ".test.jsonl"))
        manifest["held_out"] = sorted(args.held_out)
        manifest["split"] = {"train": len(train), "test": len(test)}
    with_suffix(out, ".manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"{len(samples)} samples from {len(programs)} programs "
          f"(CE {hist.totals['CE']}, FE {hist.totals['FE']}) -> {out}")
    return EXIT_OK


def cmd_train(args, s) -> int:
    from .model import checkpoint
    from .model.data import make_examples, select_samples
    from .model.train import token_accuracy, train
    from .report import loss_figure

    samples = C.read_jsonl(args.corpus)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.vocab:
        tok = Tokenizer.load(args.vocab)
    else:
        try:
            tok = Tokenizer.train([t for x in samples for t in (x.buggy, x.context, x.diagnostic, x.fix)],
                                  s["vocab_size"])
        except CorpusTooSmall as exc:
            raise UsageError(str(exc)) from None
        tok.save(with_suffix(out, ".vocab"), with_suffix(out, ".merges"))
    chosen = select_samples(samples, s["variant"])
    cfg = model_config(s, tok.size)
    examples, dropped = make_examples(tok, chosen, cfg.max_input_tokens, cfg.max_output_tokens, s["variant"])
    if not examples:
        raise UsageError(f"no training samples for variant {s['variant']}")
    lengths = sorted(len(e.src) for e in examples)
    print(f"{len(examples)} examples (variant {s['variant']}, {dropped} dropped for long fixes); "
          f"input tokens median {lengths[len(lengths) // 2]}, max {lengths[-1]}")
    validation = None
    if args.valid:
        held = select_samples(C.read_jsonl(args.valid), s["variant"])
        validation, _ = make_examples(tok, held, cfg.max_input_tokens, cfg.max_output_tokens, s["variant"])
        if not validation:
            raise UsageError(f"no validation samples for variant {s['variant']} in {args.valid}")
        print(f"{len(validation)} validation examples")
    result = train(examples, cfg, train_config(s), validation=validation,
                   progress=lambda e, l: print(f"epoch {e} loss {l:.6f}", flush=True))
    acc = token_accuracy(result.model, examples)
    extra = {"variant": s["variant"], "seed": s["seed"], "train": train_config(s).to_json()}
    if validation:
        extra["best_epoch"] = result.best_epoch
    checkpoint.save(out, result.model, tok, extra)
    write_curve(result.losses, with_suffix(out, ".loss.csv"))
    if validation:
        write_curve(result.valid_losses, with_suffix(out, ".valid.csv"))
        print(f"kept epoch {result.best_epoch} (validation loss {result.valid_losses[result.best_epoch][1]:.6f})")
    loss_figure(result.losses, with_suffix(out, ".loss.png"), s["variant"], result.valid_losses, result.best_epoch)
    print(f"teacher-forced token accuracy {acc:.4f} -> {out}")
    return EXIT_OK


def write_curve(points, path: Path) -> None:
    lines = ["epoch,loss"] + [f"{e},{l!r}" for e, l in points]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_locator(text: str) -> tuple[str, int]:
    path, sep, line = text.rpartition(":")
    if not sep or not line.isdigit():
        raise UsageError(f"expected FILE:LINE, got {text!r}")
    return path, int(line)


def cmd_repair(args, s) -> int:
    from .model import checkpoint
    from .model.repair import NoDiagnostic, repair, statement_at_line

    path, line = parse_locator(args.location)
    if Path(path).resolve() != Path(args.program).resolve():
        raise UsageError(f"location {args.location} is not in {args.program}")
    prog = parse(Path(args.program).read_text(encoding="utf-8"))
    model, tok, extra = checkpoint.load(args.ckpt)
    variant = args.variant or extra.get("variant", "full")
    try:
        stmt = statement_at_line(prog, line)
        report = repair(prog, stmt, model, tok, beam=s["beam"], n=min(s["n"], s["beam"]), variant=variant,
                        limits=ExecLimits(max_steps=s["max_steps"]))
    except NoDiagnostic:
        print("program already checks and passes its tests", file=sys.stderr)
        return EXIT_INPUT
    except UnknownNode as exc:
        raise UsageError(str(exc)) from None
    print(f"diagnostic: {report.diagnostic.rendered}")
    print(f"buggy: {report.buggy}")
    for rank, c in enumerate(report.candidates, 1):
        print(f"{rank}\t{'plausible' if c.plausible else 'rejected'}\t{c.score:.4f}\t{c.text}")
    return EXIT_OK if any(c.plausible for c in report.candidates) else EXIT_NO_PATCH


def cmd_eval(args, s) -> int:
    from .model import checkpoint
    from .model.evaluate import EvalReport, cutoffs, evaluate_model, summary_csv
    from .report import eval_figure

    samples = C.read_jsonl(args.corpus)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    reports = []
    for ckpt in args.ckpt:
        model, tok, extra = checkpoint.load(ckpt)
        variant = extra.get("variant", "full")
        label = args.label[len(reports)] if args.label and len(args.label) > len(reports) else Path(ckpt).stem
        if not samples:
            reports.append(EvalReport(label, s["beam"], cutoffs(s["beam"])))
            continue
        reports.append(evaluate_model(model, tok, samples, s["beam"], variant, label,
                                      limits=ExecLimits(max_steps=s["max_steps"])))
    per_sample = "".join(r.per_sample_csv() if i == 0 else r.per_sample_csv().split("\n", 1)[1]
                         for i, r in enumerate(reports))
    out.write_text(per_sample, encoding="utf-8")
    summary = summary_csv(reports)
    with_suffix(out, ".summary.csv").write_text(summary, encoding="utf-8")
    eval_figure(reports, with_suffix(out, ".png"))
    print(summary, end="")
    return EXIT_OK


def cmd_stats(args, s) -> int:
    samples = C.read_jsonl(args.corpus)
    hist = write_stats(samples, Path(args.out) if args.out else Path(args.corpus))
    print(hist.to_csv(), end="")
    return EXIT_OK


# ---- argument parsing ---------------------------------------------------

def _add_settings(p, names):
    for name in names:
        kind, _ = SETTINGS[name]
        flag = "--" + name.replace("_", "-")
        if name == "variant":
            p.add_argument(flag, choices=VARIANTS, default=None)
        elif name == "n":
            p.add_argument("-n", type=kind, default=None, help="number of candidates to print")
        else:
            p.add_argument(flag, type=kind, default=None)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat `key = value` settings file")
    common.add_argument("--seed", type=int, default=None, help="global random seed")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="perturb-repair", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a training corpus from seed programs")
    g.add_argument("--seeds", help="directory of .mj seed programs (default: bundled seeds)")
    g.add_argument("--out", required=True, help="output JSONL path")
    g.add_argument("--held-out", nargs="*", default=None, metavar="ID",
                   help="program ids written to a separate test split")
    _add_settings(g, ["rounds", "max_attempts", "chain_probability", "max_steps"])

    t = sub.add_parser("train", parents=[common], help="train a repair model")
    t.add_argument("corpus")
    t.add_argument("--out", required=True, help="checkpoint path")
    t.add_argument("--vocab", help="existing vocabulary file (merges file alongside)")
    t.add_argument("--valid", help="validation corpus; keeps the weights with the lowest validation loss")
    _add_settings(t, ["variant", "vocab_size", "encoder_layers", "decoder_layers", "d_model", "num_heads",
                      "ffn_dim", "max_input_tokens", "max_output_tokens", "dropout", "epochs",
                      "batch_size", "learning_rate", "warmup_steps", "clip_norm", "patience"])

    r = sub.add_parser("repair", parents=[common], help="propose patches for one statement")
    r.add_argument("program")
    r.add_argument("location", help="FILE:LINE of the suspicious statement")
    r.add_argument("--ckpt", required=True)
    _add_settings(r, ["beam", "n", "variant", "max_steps"])

    e = sub.add_parser("eval", parents=[common], help="exact and plausible match rates on a test corpus")
    e.add_argument("corpus")
    e.add_argument("--ckpt", required=True, action="append", help="checkpoint (repeat to compare)")
    e.add_argument("--label", action="append", help="report label per checkpoint")
    e.add_argument("--out", required=True, help="per-sample CSV path")
    _add_settings(e, ["beam", "max_steps"])

    st = sub.add_parser("stats", parents=[common], help="error distribution of a corpus")
    st.add_argument("corpus")
    st.add_argument("--out", help="output prefix (default: next to the corpus)")
    return ap


COMMANDS = {"gen": cmd_gen, "train": cmd_train, "repair": cmd_repair, "eval": cmd_eval, "stats": cmd_stats}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, settings(args))
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (C.MalformedLine, C.UnknownProgramId, ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
