"""Command-line entry point: registry -> weights -> sample -> train ->
compress -> adapt -> metrics.

Plain files in, plain files out. Every subcommand writes a manifest with the
hashes of its inputs and outputs next to the artifacts. Exit codes: 0 on
success, 2 on validation errors, 3 on runtime failures. The POLYTOK_LOG
environment variable (debug/info/warning/error) selects log verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .adaptation import (
    MeanInit,
    RandomInit,
    adaptation_report,
    apply_adaptation,
    load_embeddings,
    plan_adaptation,
    save_embeddings,
    save_plan,
)
from .bpe import DEFAULT_SPECIAL_TOKENS, Tokenizer, TrainConfig, iter_corpus_files, train
from .compression import compression_ratio, write_report
from .errors import InputError, PolytokError
from .manifest import write_manifest
from .metrics import (
    emit_judge_prompt,
    escape_field,
    read_curve,
    read_verdict_file,
    speedup_factor,
    unescape_field,
    win_rate,
    write_winrate_report,
)
from .registry import load_registry
from .sampling import CorpusStore, write_sample
from .weighting import (
    compute_weights,
    make_sample_plan,
    read_weight_entries,
    write_sample_plan,
    write_weight_table,
)

log = logging.getLogger("polytok")


def _require_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"input file does not exist: {p}")
    return p


def _require_dir(path: str) -> Path:
    p = Path(path)
    if not p.is_dir():
        raise InputError(f"input directory does not exist: {p}")
    return p


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_pins(specs: list[str]) -> dict[str, float]:
    pins: dict[str, float] = {}
    for spec in specs:
        code, sep, value = spec.partition("=")
        if not sep:
            raise InputError(f"--pin expects CODE=FRACTION, got {spec!r}")
        try:
            pins[code] = float(value)
        except ValueError:
            raise InputError(f"--pin fraction must be a number, got {value!r}") from None
    return pins


def cmd_weights(args) -> int:
    registry_path = _require_file(args.registry)
    pins = _parse_pins(args.pin)
    reg = load_registry(registry_path, pins)
    table = compute_weights(reg, args.mode)
    out = _out_dir(args)
    target = out / "weights.tsv"
    write_weight_table(table, target)
    write_manifest(
        out,
        "weights",
        {"mode": args.mode, "pin": sorted(args.pin)},
        {"registry": registry_path},
        {"weights": target},
    )
    print(f"wrote {target} ({len(table.entries)} languages, mode={args.mode})")
    return 0


def cmd_sample(args) -> int:
    weights_path = _require_file(args.weights)
    store = CorpusStore(_require_dir(args.store))
    entries = read_weight_entries(weights_path)
    plan = make_sample_plan(entries, args.total_bytes, args.seed)
    out = _out_dir(args)
    plan_path = out / "plan.tsv"
    sample_path = out / "sample.txt"
    write_sample_plan(plan, plan_path)
    count = write_sample(plan, store, sample_path, workers=args.workers)
    write_manifest(
        out,
        "sample",
        {"total_bytes": args.total_bytes, "seed": args.seed},
        {"weights": weights_path},
        {"plan": plan_path, "sample": sample_path},
    )
    print(f"wrote {sample_path} ({count} documents)")
    return 0


def cmd_train(args) -> int:
    corpus_paths = [_require_file(p) for p in args.corpus]
    specials = (
        tuple(args.special_tokens.split(","))
        if args.special_tokens
        else DEFAULT_SPECIAL_TOKENS
    )
    cfg = TrainConfig(
        vocab_size=args.vocab_size,
        min_frequency=args.min_frequency,
        pretokenizer_id=args.pretokenizer,
        special_tokens=specials,
    )
    tok = train(iter_corpus_files(corpus_paths), cfg, workers=args.workers)
    out = _out_dir(args)
    target = out / "tokenizer.json"
    tok.save(target)
    write_manifest(
        out,
        "train",
        {
            "vocab_size": args.vocab_size,
            "min_frequency": args.min_frequency,
            "pretokenizer": args.pretokenizer,
            "special_tokens": list(specials),
        },
        {f"corpus{i}": p for i, p in enumerate(corpus_paths)},
        {"tokenizer": target},
    )
    print(f"wrote {target} (vocab size {tok.vocab_size}, {len(tok.merges)} merges)")
    return 0


def cmd_encode(args) -> int:
    tok_path = _require_file(args.tokenizer)
    input_path = _require_file(args.input)
    tok = Tokenizer.load(tok_path)
    out = _out_dir(args)
    target = out / "ids.txt"
    with input_path.open("r", encoding="utf-8") as src, target.open(
        "w", encoding="utf-8", newline="\n"
    ) as dst:
        for line in src:
            ids = tok.encode(line.rstrip("\n")).ids
            dst.write(" ".join(str(i) for i in ids))
            dst.write("\n")
    write_manifest(
        out, "encode", {}, {"tokenizer": tok_path, "input": input_path}, {"ids": target}
    )
    print(f"wrote {target}")
    return 0


def cmd_compress(args) -> int:
    cand_path = _require_file(args.candidate)
    ref_path = _require_file(args.reference)
    store = CorpusStore(_require_dir(args.store))
    candidate = Tokenizer.load(cand_path)
    reference = Tokenizer.load(ref_path)
    languages = args.languages.split(",") if args.languages else None
    report = compression_ratio(candidate, reference, store, languages)
    out = _out_dir(args)
    target = out / "compression.tsv"
    write_report(report, target)
    write_manifest(
        out,
        "compress",
        {"languages": sorted(languages) if languages else "all"},
        {"candidate": cand_path, "reference": ref_path},
        {"report": target},
    )
    print(
        f"wrote {target} (macro ratio {report.macro_average_ratio:.6g} "
        f"over {len(report.per_language)} languages)"
    )
    return 0


def cmd_adapt(args) -> int:
    old_path = _require_file(args.old_tokenizer)
    new_path = _require_file(args.new_tokenizer)
    old_tok = Tokenizer.load(old_path)
    new_tok = Tokenizer.load(new_path)
    if args.init == "mean":
        mode = MeanInit()
    else:
        mode = RandomInit(mean=args.init_mean, std=args.init_std)
    plan = plan_adaptation(old_tok, new_tok, mode)
    out = _out_dir(args)
    plan_path = out / "plan.tsv"
    save_plan(plan, plan_path)
    inputs = {"old_tokenizer": old_path, "new_tokenizer": new_path}
    outputs = {"plan": plan_path}

    if args.old_embeddings:
        emb_path = _require_file(args.old_embeddings)
        old_emb = load_embeddings(emb_path)
        new_emb = apply_adaptation(plan, old_emb, seed=args.seed)
        emb_target = out / "adapted.emb"
        save_embeddings(new_emb, emb_target)
        inputs["old_embeddings"] = emb_path
        outputs["embeddings"] = emb_target

    if args.probe_store:
        store = CorpusStore(_require_dir(args.probe_store))
        coverage = adaptation_report(plan, new_tok, store)
        cov_path = out / "coverage.tsv"
        lines = [
            f"{code}\t{format(frac, '.17g')}" for code, frac in sorted(coverage.items())
        ]
        cov_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        outputs["coverage"] = cov_path

    write_manifest(
        out,
        "adapt",
        {
            "init": args.init,
            "init_mean": args.init_mean,
            "init_std": args.init_std,
            "seed": args.seed,
        },
        inputs,
        outputs,
    )
    print(
        f"wrote {plan_path} (shared {len(plan.shared)}, novel {len(plan.novel)}, "
        f"dropped {len(plan.dropped)})"
    )
    return 0


def cmd_judge_prompts(args) -> int:
    pairs_path = _require_file(args.pairs)
    out = _out_dir(args)
    target = out / "prompts.tsv"
    count = 0
    with pairs_path.open("r", encoding="utf-8") as src, target.open(
        "w", encoding="utf-8", newline="\n"
    ) as dst:
        for lineno, line in enumerate(src, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise InputError(
                    f"pairs file line {lineno}: expected "
                    "example_id<TAB>iso<TAB>instruction<TAB>completion_a<TAB>completion_b"
                )
            example_id, iso_code = fields[0], fields[1]
            instruction, a, b = (unescape_field(f) for f in fields[2:])
            prompt = emit_judge_prompt(instruction, a, b)
            dst.write(
                "\t".join(
                    [
                        example_id,
                        iso_code,
                        escape_field(prompt.system),
                        escape_field(prompt.user),
                    ]
                )
            )
            dst.write("\n")
            count += 1
    write_manifest(out, "judge-prompts", {}, {"pairs": pairs_path}, {"prompts": target})
    print(f"wrote {target} ({count} prompts)")
    return 0


def _parse_subsets(specs: list[str]) -> dict[str, list[str]]:
    subsets: dict[str, list[str]] = {}
    for spec in specs:
        name, sep, members = spec.partition("=")
        if not sep or not members:
            raise InputError(f"--subset expects NAME=iso1,iso2,..., got {spec!r}")
        subsets[name] = members.split(",")
    return subsets


def cmd_winrate(args) -> int:
    verdicts_path = _require_file(args.verdicts)
    records, unparseable = read_verdict_file(verdicts_path)
    subsets = _parse_subsets(args.subset)
    report = win_rate(records, subsets, candidate=args.candidate, unparseable=unparseable)
    out = _out_dir(args)
    target = out / "winrate.tsv"
    write_winrate_report(report, target)
    write_manifest(
        out,
        "winrate",
        {"candidate": args.candidate, "subset": sorted(args.subset)},
        {"verdicts": verdicts_path},
        {"report": target},
    )
    print(f"wrote {target} ({len(report.per_language)} languages)")
    return 0


def cmd_speedup(args) -> int:
    cand_path = _require_file(args.candidate)
    base_path = _require_file(args.baseline)
    result = speedup_factor(
        read_curve(cand_path, "candidate"), read_curve(base_path, "baseline")
    )
    out = _out_dir(args)
    target = out / "speedup.tsv"
    g = lambda x: format(x, ".17g")
    target.write_text(
        "factor\tthreshold\tcandidate_step\tbaseline_step\n"
        f"{g(result.factor)}\t{g(result.threshold)}\t{g(result.candidate_step)}"
        f"\t{result.baseline_step}\n",
        encoding="utf-8",
    )
    write_manifest(
        out,
        "speedup",
        {},
        {"candidate": cand_path, "baseline": base_path},
        {"speedup": target},
    )
    print(
        f"factor={result.factor:.2f} (baseline step {result.baseline_step} -> "
        f"candidate step {result.candidate_step:.6g})"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polytok",
        description="Multilingual tokenizer engineering toolkit",
    )
    parser.add_argument("--version", action="version", version=f"polytok {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weights", help="compute per-language sampling weights")
    p.add_argument("--registry", required=True)
    p.add_argument("--mode", choices=("universal", "uniform"), default="universal")
    p.add_argument("--pin", action="append", default=[], metavar="CODE=FRACTION")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("sample", help="draw a weighted corpus sample")
    p.add_argument("--weights", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--total-bytes", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("train", help="train a byte-level BPE tokenizer")
    p.add_argument("--corpus", action="append", required=True)
    p.add_argument("--vocab-size", type=int, required=True)
    p.add_argument("--min-frequency", type=int, default=5)
    p.add_argument("--pretokenizer", default="o200k")
    p.add_argument("--special-tokens", default="", metavar="NAME,NAME,...")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("encode", help="encode a document file to token ids")
    p.add_argument("--tokenizer", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("compress", help="per-language compression ratio report")
    p.add_argument("--candidate", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--languages", default="", metavar="iso1,iso2,...")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("adapt", help="vocabulary adaptation plan and embeddings")
    p.add_argument("--old-tokenizer", required=True)
    p.add_argument("--new-tokenizer", required=True)
    p.add_argument("--old-embeddings", default="")
    p.add_argument("--init", choices=("random", "mean"), default="mean")
    p.add_argument("--init-mean", type=float, default=0.0)
    p.add_argument("--init-std", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--probe-store", default="")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_adapt)

    p = sub.add_parser("judge-prompts", help="emit pairwise judge prompts")
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_judge_prompts)

    p = sub.add_parser("winrate", help="aggregate judge verdicts into win rates")
    p.add_argument("--verdicts", required=True)
    p.add_argument("--candidate", choices=("A", "B"), default="A")
    p.add_argument("--subset", action="append", default=[], metavar="NAME=iso1,iso2")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_winrate)

    p = sub.add_parser("speedup", help="adaptation-speed factor from curves")
    p.add_argument("--candidate", required=True)
    p.add_argument("--baseline", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_speedup)

    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("POLYTOK_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PolytokError as exc:
        print(f"polytok: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.debug("unexpected failure", exc_info=True)
        print(f"polytok: runtime failure: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
