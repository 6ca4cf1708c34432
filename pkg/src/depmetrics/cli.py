"""Command-line surface.

Subcommands: validate, metrics, dist, entropy, trend, corr, valency, report,
generate. Settings come from flags or a single JSON config file; explicit
flags override the file. Exit codes: 0 success, 1 input error, 2 config
error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import INPUT_ERRORS, ConfigError, ConstraintUnsatisfiable
from .randtree import RNG_NAME, GeneratorConfig, generate
from .report import (
    REPORT_RENDERERS,
    RunConfig,
    TOOL_NAME,
    compute_analyses,
    json_text,
    load_corpus,
    report_json_dict,
    run_meta,
    write_outputs,
)
from .treebank import FORMATS, serialize_canonical

_EXTENSION_FORMATS = {
    ".conllu": "conllu",
    ".conll": "conllu",
    ".cabocha": "cabocha",
    ".cab": "cabocha",
    ".jsonl": "canonical",
    ".ndjson": "canonical",
}

_CONFIG_KEYS = {
    "inputs",
    "sl_min",
    "sl_max",
    "dist_sls",
    "min_bucket",
    "valency_mode",
    "lexicon_path",
    "entropy_base",
    "log_base",
    "seed",
    "output_dir",
    "drop_punct",
}


def infer_format(path: str) -> str:
    suffix = Path(path).suffix.lower()
    if suffix not in _EXTENSION_FORMATS:
        raise ConfigError(
            f"cannot infer format of {path!r} from its extension; pass --format"
        )
    return _EXTENSION_FORMATS[suffix]


def _parse_dist_sls(value: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in value.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"--dist-sls expects a comma-separated integer list, got {value!r}") from None


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the optional JSON config file, and explicit flags."""
    values: dict[str, object] = {}
    if getattr(args, "config", None):
        try:
            raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc.msg})") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{args.config}: top level must be an object")
        for key, value in raw.items():
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"{args.config}: unknown config key {key!r}")
            values[key] = value

    for key in (
        "sl_min",
        "sl_max",
        "min_bucket",
        "valency_mode",
        "lexicon_path",
        "entropy_base",
        "log_base",
        "seed",
        "output_dir",
        "drop_punct",
    ):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if getattr(args, "dist_sls", None) is not None:
        values["dist_sls"] = _parse_dist_sls(args.dist_sls)
    elif "dist_sls" in values:
        values["dist_sls"] = tuple(int(sl) for sl in values["dist_sls"])  # from config file

    if getattr(args, "inputs", None):
        fmt = getattr(args, "format", None)
        values["inputs"] = [(path, fmt or infer_format(path)) for path in args.inputs]
    elif "inputs" in values:
        file_inputs = []
        for entry in values["inputs"]:
            if not isinstance(entry, dict) or "path" not in entry:
                raise ConfigError("config 'inputs' entries must be objects with a 'path'")
            path = str(entry["path"])
            file_inputs.append((path, str(entry.get("format") or infer_format(path))))
        values["inputs"] = file_inputs

    config = RunConfig(**values)  # type: ignore[arg-type]
    config.validate()
    return config


def _require_inputs(config: RunConfig) -> None:
    if not config.inputs:
        raise ConfigError("no input files given (pass paths or a config file with 'inputs')")


def cmd_validate(args: argparse.Namespace) -> int:
    config = build_config(args)
    _require_inputs(config)
    corpus = load_corpus(config)
    print("# " + json.dumps(run_meta(config, corpus, "validate"), sort_keys=True))
    for summary in corpus.inputs:
        print(f"{summary.path}: {summary.accepted} accepted, {summary.rejected} rejected")
    for rejection in corpus.rejections:
        print(f"  {rejection.source}: {rejection.reason}")
    print(f"TOTAL: {len(corpus.sentences)} accepted, {len(corpus.rejections)} rejected")
    return 0 if corpus.sentences else 1


def cmd_metrics(args: argparse.Namespace) -> int:
    config = build_config(args)
    _require_inputs(config)
    corpus = load_corpus(config)
    lines = ["# " + json.dumps(run_meta(config, corpus, "metrics"), sort_keys=True)]
    lines.extend(json.dumps(r.to_json_dict(), sort_keys=True) for r in corpus.records)
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


_SINGLE_COMMAND_FILES = {
    "dist": ("dist.csv",),
    "entropy": ("entropy.csv", "entropy_gated.csv"),
    "trend": ("trend.csv",),
    "corr": ("corr.csv", "corr_gated.csv"),
    "valency": ("valency.csv", "valency_fit.csv"),
}


def _run_analysis_command(args: argparse.Namespace, command: str) -> int:
    config = build_config(args)
    _require_inputs(config)
    corpus = load_corpus(config)
    analyses = compute_analyses(config, corpus)
    meta = run_meta(config, corpus, command)
    if command == "trend":
        meta["crossings"] = [list(interval) for interval in analyses.crossings]
    if command == "valency":
        meta["lexicon_misses"] = analyses.lexicon_misses
    files = {
        name: REPORT_RENDERERS[name](config, analyses)
        for name in _SINGLE_COMMAND_FILES[command]
    }
    files["meta.json"] = json_text(meta)
    for path in write_outputs(config.output_dir, files):
        print(f"wrote {path}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    config = build_config(args)
    _require_inputs(config)
    corpus = load_corpus(config)
    analyses = compute_analyses(config, corpus)
    files = {name: render(config, analyses) for name, render in REPORT_RENDERERS.items()}
    files["report.json"] = json_text(report_json_dict(config, corpus, analyses))
    files["meta.json"] = json_text(run_meta(config, corpus, "report"))
    for path in write_outputs(config.output_dir, files):
        print(f"wrote {path}")
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    constraint = args.constraint
    if args.max_root_out_degree is not None:
        if constraint is not None:
            raise ConfigError("--constraint and --max-root-out-degree are mutually exclusive")
        constraint = "max_root_out_degree"
    try:
        gen_config = GeneratorConfig(
            n=args.n,
            seed=args.seed,
            count=args.count,
            constraint=constraint,
            max_root_out_degree=args.max_root_out_degree,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    header = "# " + json.dumps(
        {
            "tool": TOOL_NAME,
            "version": __version__,
            "command": "generate",
            "n": gen_config.n,
            "count": gen_config.count,
            "seed": gen_config.seed,
            "constraint": gen_config.constraint,
            "max_root_out_degree": gen_config.max_root_out_degree,
            "rng": RNG_NAME,
        },
        sort_keys=True,
    )
    lines = [header]
    lines.extend(serialize_canonical(sentence) for sentence in generate(gen_config))
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _add_corpus_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("inputs", nargs="*", metavar="PATH", help="input corpus files")
    sub.add_argument(
        "--format",
        choices=sorted(FORMATS),
        help="format of all inputs (default: infer from file extension)",
    )
    sub.add_argument("--config", help="JSON config file; explicit flags override it")
    sub.add_argument("--drop-punct", action="store_true", default=None,
                     help="drop PUNCT nodes from CoNLL-U input")
    sub.add_argument("--sl-min", type=int, dest="sl_min")
    sub.add_argument("--sl-max", type=int, dest="sl_max")
    sub.add_argument("--dist-sls", dest="dist_sls",
                     help="comma-separated lengths for conditional distributions")
    sub.add_argument("--min-bucket", type=int, dest="min_bucket",
                     help="minimum sentences per length for entropy/correlation points")
    sub.add_argument("--valency-mode", choices=("lexicon", "root-out-degree"), dest="valency_mode")
    sub.add_argument("--lexicon", dest="lexicon_path", help="valency lexicon TSV (lemma<TAB>class)")
    sub.add_argument("--entropy-base", choices=("2", "e", "10"), dest="entropy_base")
    sub.add_argument("--log-base", choices=("e", "10"), dest="log_base")
    sub.add_argument("--seed", type=int, dest="seed")
    sub.add_argument("--output-dir", dest="output_dir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="Dependency distance / hierarchical distance metrics over parsed corpora.",
    )
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    sub = subparsers.add_parser("validate", help="check inputs and report accepted/rejected counts")
    _add_corpus_args(sub)
    sub.set_defaults(func=cmd_validate)

    sub = subparsers.add_parser("metrics", help="dump per-sentence metric records as JSONL")
    _add_corpus_args(sub)
    sub.add_argument("-o", "--output", help="write to a file instead of stdout")
    sub.set_defaults(func=cmd_metrics)

    for name, help_text in (
        ("dist", "pooled and length-conditioned DD/HD distributions"),
        ("entropy", "entropy of length-conditioned distributions"),
        ("trend", "mean MDD/MHD by sentence length"),
        ("corr", "per-length Spearman correlation of MDD and MHD"),
        ("valency", "valency-conditioned DD=1/HD=1 counts and fits"),
    ):
        sub = subparsers.add_parser(name, help=help_text)
        _add_corpus_args(sub)
        sub.set_defaults(func=lambda a, _name=name: _run_analysis_command(a, _name))

    sub = subparsers.add_parser("report", help="write every table plus report.json")
    _add_corpus_args(sub)
    sub.set_defaults(func=cmd_report)

    sub = subparsers.add_parser("generate", help="generate a random-tree corpus (canonical JSONL)")
    sub.add_argument("--n", type=int, required=True, help="nodes per sentence")
    sub.add_argument("--count", type=int, default=1, help="number of sentences")
    sub.add_argument("--seed", type=int, required=True)
    sub.add_argument("--constraint", choices=("chain", "star"))
    sub.add_argument("--max-root-out-degree", type=int, dest="max_root_out_degree")
    sub.add_argument("-o", "--output", help="write to a file instead of stdout")
    sub.set_defaults(func=cmd_generate)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConstraintUnsatisfiable as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
