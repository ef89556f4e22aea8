"""Command line front end.

Subcommands:
  analyze  CoNLL-U in, one JSON record per sentence out
  aspects  like analyze but records carry only the target opinions
  encode   CoNLL-U to tagger-bridge lines for the chosen scheme
  decode   tagger-bridge lines back to CoNLL-U (repair stats on stderr)
  eval     predictions + gold JSON-lines to a metrics report
  bench    throughput benchmark over a synthetic or file corpus
  gen      write a synthetic corpus (bridge lines or CoNLL-U)

Settings resolve in three layers: built-in defaults, then a key=value
config file (--config), then explicit flags. Lexicon paths that do not
exist as given are retried under $SALSA_LEXICON_DIR. Exit codes: 0 on
success, 1 for data errors under the abort policy, 2 for config errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Dict, Iterator, List, Optional, Sequence, Tuple

from . import __version__
from .assets import demo_lexicon
from .bench import BenchError, run_bench, synthetic_corpus, synthetic_sentence, word_pool
from .conllu import ConlluError, ReadStats, format_sentence, read_conllu
from .encodings import (
    BridgeError,
    BridgeStats,
    NonProjectiveError,
    Scheme,
    encode,
    format_tagger_line,
    parse_tagger_output,
)
from .evaluation import (
    EvalError,
    MetricsReport,
    conversion_coverage,
    eval_parse,
    eval_sentences,
    eval_targets,
    load_gold,
)
from .lexicon import LexiconError, PolarityLexicon, load_lexicon
from .opinions import OpinionError
from .rules import RuleConfig, RuleError, analyze, baseline_wordcount
from .tree import DepTree, TreeError

LEXICON_DIR_ENV = "SALSA_LEXICON_DIR"

_DATA_ERRORS = (ConlluError, BridgeError, NonProjectiveError, EvalError, TreeError, OpinionError)


class ConfigError(ValueError):
    """Bad settings: unknown keys, unreadable files, invalid values."""


@dataclass(frozen=True)
class PipelineConfig:
    """Resolved settings shared by every subcommand."""

    language: str = "en"
    lexicon: Optional[str] = None
    domain_lexicon: Optional[str] = None
    rules: Optional[str] = None
    scheme: Scheme = Scheme.REL_OFFSET
    input: Optional[str] = None
    output: Optional[str] = None
    on_error: str = "abort"
    workers: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ConfigError(f"worker count must be >= 1, got {self.workers}")
        if self.on_error not in ("skip", "abort"):
            raise ConfigError(f"on_error must be 'skip' or 'abort', got {self.on_error!r}")

    def load_lexicon(self) -> PolarityLexicon:
        try:
            if self.lexicon is None:
                lexicon = demo_lexicon(self.language)
            else:
                lexicon = load_lexicon(_find_lexicon(self.lexicon), language=self.language)
            if self.domain_lexicon is not None:
                overlay = load_lexicon(
                    _find_lexicon(self.domain_lexicon), language=self.language
                )
                lexicon = lexicon.overlay(overlay)
            return lexicon
        except LexiconError as exc:
            raise ConfigError(f"lexicon: {exc}") from None

    def load_rules(self) -> RuleConfig:
        if self.rules is None:
            return RuleConfig()
        path = Path(self.rules)
        if not path.exists():
            raise ConfigError(f"rule config file not found: {path}")
        try:
            return RuleConfig.from_file(path)
        except RuleError as exc:
            raise ConfigError(f"rule config: {exc}") from None


def _find_lexicon(path_text: str) -> Path:
    path = Path(path_text)
    if path.exists():
        return path
    search_dir = os.environ.get(LEXICON_DIR_ENV)
    if search_dir:
        fallback = Path(search_dir) / path_text
        if fallback.exists():
            return fallback
        raise ConfigError(
            f"lexicon file not found: {path} (also tried {fallback})"
        )
    raise ConfigError(f"lexicon file not found: {path}")


_CONFIG_KEYS = (
    "language",
    "lexicon",
    "domain_lexicon",
    "rules",
    "scheme",
    "input",
    "output",
    "on_error",
    "workers",
    "seed",
)


def _read_config_file(path_text: str) -> Dict[str, str]:
    path = Path(path_text)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown setting {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate setting {key!r}")
        values[key] = value
    return values


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    """defaults, then config file entries, then explicit flags."""
    merged: Dict[str, object] = {}
    if getattr(args, "config", None):
        merged.update(_read_config_file(args.config))
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    try:
        if "scheme" in merged and not isinstance(merged["scheme"], Scheme):
            merged["scheme"] = Scheme.parse(str(merged["scheme"]))
        for key in ("workers", "seed"):
            if key in merged:
                merged[key] = int(merged[key])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return PipelineConfig(**merged)  # type: ignore[arg-type]


@contextmanager
def _open_output(cfg: PipelineConfig) -> Iterator[IO[str]]:
    if cfg.output is None:
        yield sys.stdout
    else:
        with open(cfg.output, "w", encoding="utf-8") as handle:
            yield handle


def _input_source(cfg: PipelineConfig):
    if cfg.input is None:
        return sys.stdin
    path = Path(cfg.input)
    if not path.exists():
        raise ConfigError(f"input file not found: {path}")
    return path


def _dump_line(record: dict, out: IO[str]) -> None:
    out.write(json.dumps(record, ensure_ascii=False) + "\n")


# ------------------------------------------------------------------ analyze


def _sentence_record(
    tree: DepTree,
    lexicon: PolarityLexicon,
    rules_cfg: RuleConfig,
    explain: bool,
    baseline: bool,
    aspects_only: bool,
) -> dict:
    if baseline:
        valence, label = baseline_wordcount(tree, lexicon, rules_cfg)
        return {
            "sent_id": tree.sentence_id,
            "class": label,
            "valence": valence,
            "baseline": True,
        }
    result = analyze(tree, lexicon, rules_cfg)
    opinions = [
        {
            "target": [op.target_token_ids[0], op.target_token_ids[-1]],
            "text": op.target_text,
            "polarity": op.opinion_class,
            "valence": op.valence,
            "evidence": list(op.evidence_token_ids),
        }
        for op in result.opinions
    ]
    if aspects_only:
        return {"sent_id": tree.sentence_id, "opinions": opinions}
    record = {
        "sent_id": tree.sentence_id,
        "class": result.sentence_class,
        "valence": result.sentence_valence,
        "opinions": opinions,
    }
    if explain:
        record["trace"] = [
            [step.token_id, step.rule, step.before, step.after, step.note]
            for step in result.trace
        ]
    return record


def _analyze_chunk(args) -> List[dict]:
    trees, lexicon, rules_cfg, explain, baseline, aspects_only = args
    return [
        _sentence_record(tree, lexicon, rules_cfg, explain, baseline, aspects_only)
        for tree in trees
    ]


def _analyze_records(
    trees: Sequence[DepTree],
    lexicon: PolarityLexicon,
    rules_cfg: RuleConfig,
    workers: int,
    explain: bool,
    baseline: bool,
    aspects_only: bool,
) -> List[dict]:
    if workers == 1 or len(trees) < 2 * workers:
        return _analyze_chunk((trees, lexicon, rules_cfg, explain, baseline, aspects_only))
    step = -(-len(trees) // workers)
    chunks = [trees[i : i + step] for i in range(0, len(trees), step)]
    records: List[dict] = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(
            _analyze_chunk,
            [(chunk, lexicon, rules_cfg, explain, baseline, aspects_only) for chunk in chunks],
        ):
            records.extend(part)  # map yields chunks in submission order
    return records


def cmd_analyze(cfg: PipelineConfig, args: argparse.Namespace) -> int:
    lexicon = cfg.load_lexicon()
    rules_cfg = cfg.load_rules()
    aspects_only = args.command == "aspects"
    explain = getattr(args, "explain", False)
    baseline = getattr(args, "baseline", False)
    stats = ReadStats()
    trees = list(read_conllu(_input_source(cfg), on_error=cfg.on_error, stats=stats))
    records = _analyze_records(
        trees, lexicon, rules_cfg, cfg.workers, explain, baseline, aspects_only
    )
    with _open_output(cfg) as out:
        for record in records:
            _dump_line(record, out)
    if stats.skipped:
        print(f"skipped {stats.skipped} unreadable sentences", file=sys.stderr)
    return 0


# ------------------------------------------------------------ encode/decode


def cmd_encode(cfg: PipelineConfig) -> int:
    skipped = 0
    with _open_output(cfg) as out:
        for tree in read_conllu(_input_source(cfg), on_error=cfg.on_error):
            try:
                line = format_tagger_line(tree, encode(tree, cfg.scheme))
            except NonProjectiveError:
                if cfg.on_error == "abort":
                    raise
                skipped += 1
                continue
            out.write(line + "\n")
    if skipped:
        print(f"skipped {skipped} non-projective sentences", file=sys.stderr)
    return 0


def cmd_decode(cfg: PipelineConfig) -> int:
    stats = BridgeStats()
    with _open_output(cfg) as out:
        for _, result in parse_tagger_output(
            _input_source(cfg), cfg.scheme, on_error=cfg.on_error, stats=stats
        ):
            tree = result.tree
            keeper = DepTree(
                tree.tokens,
                sentence_id=tree.sentence_id,
                metadata={"sent_id": tree.sentence_id},
            )
            out.write(format_sentence(keeper) + "\n\n")
    repairs = stats.repairs
    print(
        f"decoded {stats.records} sentences, repairs total={repairs.total} "
        f"(out_of_range={repairs.out_of_range}, extra_roots={repairs.extra_roots}, "
        f"missing_root={repairs.missing_root}, cycles_broken={repairs.cycles_broken}), "
        f"skipped={stats.skipped}",
        file=sys.stderr,
    )
    return 0


# ---------------------------------------------------------------------- eval


def _prediction_entry() -> dict:
    return {"class": None, "items": [], "has_opinions": False}


def _load_predictions(path: Path) -> Dict[str, dict]:
    """Accepts analyze/aspects output or a gold-format file."""
    first = None
    for raw in path.read_text(encoding="utf-8").splitlines():
        if raw.strip():
            first = raw
            break
    table: Dict[str, dict] = {}
    if first is None:
        return table
    try:
        gold_format = "tokens" in json.loads(first)
    except json.JSONDecodeError as exc:
        raise EvalError(f"{path}: bad JSON on first record: {exc}") from None
    if gold_format:
        for record in load_gold(path):
            entry = _prediction_entry()
            entry["class"] = record.gold_class
            if record.gold_opinions is not None:
                entry["has_opinions"] = True
                entry["items"] = [
                    (op.target_span, op.polarity)
                    for op in record.gold_opinions.opinions
                    if op.target_span is not None
                ]
            table[record.sentence_id] = entry
        return table
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise EvalError(f"{path}:{lineno}: bad JSON: {exc}") from None
        sid = str(obj.get("sent_id", ""))
        if not sid:
            raise EvalError(f"{path}:{lineno}: prediction record missing sent_id")
        if sid in table:
            raise EvalError(f"{path}:{lineno}: duplicate prediction for {sid!r}")
        entry = _prediction_entry()
        if obj.get("class") is not None:
            entry["class"] = str(obj["class"])
        if "opinions" in obj:
            entry["has_opinions"] = True
            for op in obj["opinions"]:
                span = op.get("target")
                if span is None:
                    continue
                entry["items"].append(((int(span[0]), int(span[1])), str(op.get("polarity"))))
        table[sid] = entry
    return table


def cmd_eval(cfg: PipelineConfig, args: argparse.Namespace) -> int:
    pred_path, gold_path = Path(args.pred), Path(args.gold)
    for path in (pred_path, gold_path):
        if not path.exists():
            raise ConfigError(f"file not found: {path}")
    gold_records = list(load_gold(gold_path))
    preds = _load_predictions(pred_path)
    strict = cfg.on_error == "abort"

    pred_labels, gold_labels = [], []
    for record in gold_records:
        if record.gold_class is None:
            continue
        entry = preds.get(record.sentence_id)
        if entry is None or entry["class"] is None:
            if strict:
                raise EvalError(f"no predicted class for {record.sentence_id!r}")
            continue
        pred_labels.append(entry["class"])
        gold_labels.append(record.gold_class)
    sentence_metrics = eval_sentences(pred_labels, gold_labels) if gold_labels else None

    gold_sets = {
        record.sentence_id: record.gold_opinions
        for record in gold_records
        if record.gold_opinions is not None
    }
    targets_exact = targets_overlap = None
    if gold_sets:
        pred_map = {}
        for sid in gold_sets:
            entry = preds.get(sid)
            if entry is None:
                if strict:
                    raise EvalError(f"no prediction record for {sid!r}")
                continue
            pred_map[sid] = entry["items"]
        targets_exact = eval_targets(pred_map, gold_sets, mode="exact")
        targets_overlap = eval_targets(pred_map, gold_sets, mode="overlap")

    parse_metrics = None
    if getattr(args, "pred_parse", None):
        parse_path = Path(args.pred_parse)
        if not parse_path.exists():
            raise ConfigError(f"file not found: {parse_path}")
        by_id = {
            tree.sentence_id: tree
            for tree in read_conllu(parse_path, on_error="abort")
        }
        pred_trees, gold_trees = [], []
        for record in gold_records:
            if record.parse is None:
                continue
            tree = by_id.get(record.sentence_id)
            if tree is None:
                if strict:
                    raise EvalError(f"no predicted parse for {record.sentence_id!r}")
                continue
            pred_trees.append(tree)
            gold_trees.append(record.parse)
        if not gold_trees:
            raise EvalError("gold file has no parses to score against")
        parse_metrics = eval_parse(pred_trees, gold_trees)

    report = MetricsReport(
        sentences=len(gold_records),
        opinions=sum(len(s.opinions) for s in gold_sets.values()),
        conversion_coverage=conversion_coverage(gold_sets.values()),
        sentence=sentence_metrics,
        targets_exact=targets_exact,
        targets_overlap=targets_overlap,
        parse=parse_metrics,
    )
    with _open_output(cfg) as out:
        out.write(json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n")
    return 0


# ----------------------------------------------------------------- bench/gen


def cmd_bench(cfg: PipelineConfig, args: argparse.Namespace) -> int:
    lexicon = cfg.load_lexicon()
    rules_cfg = cfg.load_rules()
    if cfg.input is not None:
        source = _input_source(cfg)
    else:
        source = list(
            synthetic_corpus(
                args.sentences, args.length, lexicon, seed=cfg.seed, scheme=cfg.scheme
            )
        )
    report = run_bench(
        source,
        lexicon,
        rules_cfg,
        scheme=cfg.scheme,
        workers=cfg.workers,
        warmup=args.warmup,
    )
    with _open_output(cfg) as out:
        out.write(json.dumps(report.to_dict(), indent=2) + "\n")
    return 0


def cmd_gen(cfg: PipelineConfig, args: argparse.Namespace) -> int:
    lexicon = cfg.load_lexicon()
    with _open_output(cfg) as out:
        if args.format == "bridge":
            for line in synthetic_corpus(
                args.sentences, args.length, lexicon, seed=cfg.seed, scheme=cfg.scheme
            ):
                out.write(line + "\n")
        else:
            pool = word_pool(lexicon)
            for index in range(args.sentences):
                tree = synthetic_sentence(
                    args.length, pool, cfg.seed * 1_000_003 + index, f"syn-{index}"
                )
                keeper = DepTree(
                    tree.tokens,
                    sentence_id=tree.sentence_id,
                    metadata={"sent_id": tree.sentence_id},
                )
                out.write(format_sentence(keeper) + "\n\n")
    return 0


# ------------------------------------------------------------------- parser


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value settings file")
    parser.add_argument("--language", help="lexicon language code (default en)")
    parser.add_argument("--lexicon", help="base lexicon TSV (default: built-in demo)")
    parser.add_argument("--domain-lexicon", dest="domain_lexicon", help="overlay lexicon TSV")
    parser.add_argument("--rules", help="rule engine key=value config file")
    parser.add_argument(
        "--scheme", help="label scheme: rel-offset, rel-pos, or brackets"
    )
    parser.add_argument("-i", "--input", help="input path (default: stdin)")
    parser.add_argument("-o", "--output", help="output path (default: stdout)")
    parser.add_argument(
        "--on-error", dest="on_error", choices=("skip", "abort"),
        help="bad-sentence policy (default abort)",
    )
    parser.add_argument("--workers", type=int, help="parallel worker count")
    parser.add_argument("--seed", type=int, help="random seed for synthetic data")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treesent",
        description="Sentiment analysis over dependency trees, plus the "
        "label encodings that let a tagger produce those trees.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="score sentences from CoNLL-U")
    _add_common_flags(analyze)
    analyze.add_argument("--explain", action="store_true", help="include rule traces")
    analyze.add_argument(
        "--baseline", action="store_true", help="syntax-free word-count scoring"
    )

    aspects = commands.add_parser("aspects", help="emit only per-target opinions")
    _add_common_flags(aspects)

    encode_cmd = commands.add_parser("encode", help="CoNLL-U to tagger bridge lines")
    _add_common_flags(encode_cmd)

    decode_cmd = commands.add_parser("decode", help="tagger bridge lines to CoNLL-U")
    _add_common_flags(decode_cmd)

    eval_cmd = commands.add_parser("eval", help="score predictions against gold")
    _add_common_flags(eval_cmd)
    eval_cmd.add_argument("--pred", required=True, help="predictions JSON-lines file")
    eval_cmd.add_argument("--gold", required=True, help="gold JSON-lines file")
    eval_cmd.add_argument(
        "--pred-parse", dest="pred_parse", help="predicted parses (CoNLL-U) for UAS/LAS"
    )

    bench = commands.add_parser("bench", help="throughput benchmark")
    _add_common_flags(bench)
    bench.add_argument("--sentences", type=int, default=10_000, help="synthetic corpus size")
    bench.add_argument("--length", type=int, default=20, help="synthetic sentence length")
    bench.add_argument("--warmup", type=int, default=50, help="untimed warmup sentences")

    gen = commands.add_parser("gen", help="write a synthetic corpus")
    _add_common_flags(gen)
    gen.add_argument("--sentences", type=int, default=1000, help="corpus size")
    gen.add_argument("--length", type=int, default=20, help="sentence length")
    gen.add_argument(
        "--format", choices=("bridge", "conllu"), default="bridge", help="output format"
    )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _build_config(args)
        if args.command in ("analyze", "aspects"):
            return cmd_analyze(cfg, args)
        if args.command == "encode":
            return cmd_encode(cfg)
        if args.command == "decode":
            return cmd_decode(cfg)
        if args.command == "eval":
            return cmd_eval(cfg, args)
        if args.command == "bench":
            return cmd_bench(cfg, args)
        return cmd_gen(cfg, args)
    except (ConfigError, BenchError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
