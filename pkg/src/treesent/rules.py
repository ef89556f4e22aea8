"""Compositional sentiment rules over dependency trees.

A post-order walk assigns each node a lexicon valence, lets intensifier
dependents scale it, and lets negator dependents shift the node's whole
subtree total toward (and possibly past) zero, clamped to a cap. An
adversative marker splits the sentence linearly and reweights the two
halves. Every rule application is recorded as a trace step so a score can
be audited or replayed after the fact.

A bag-of-words baseline with no syntax and no shifters is included for
contrast experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

from .conllu import Source, iter_lines
from .lexicon import ADVERSATIVE as _ADV_KIND
from .lexicon import INTENSIFIER as _INT_KIND
from .lexicon import NEGATOR as _NEG_KIND
from .lexicon import PolarityLexicon, merge_collocations
from .tree import DepTree, Token

POSITIVE = "positive"
NEGATIVE = "negative"
NEUTRAL = "neutral"
CLASSES = (POSITIVE, NEGATIVE, NEUTRAL)

HEAD_SUBTREE = "HEAD_SUBTREE"

# trace step rule names
LEXICON = "LEXICON"
INTENSIFY = "INTENSIFY"
NEGATE = "NEGATE"
ADVERSATIVE = "ADVERSATIVE"
AGGREGATE = "AGGREGATE"

# deprels whose dependents extend a nominal target span and disqualify
# their own token from heading a separate candidate
_NOMINAL_MODIFIERS = ("compound", "flat", "amod")
_NOUN_TAGS = ("NOUN", "PROPN")


class RuleError(ValueError):
    """Bad rule configuration or an invalid scoring request."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def classify_valence(valence: float, threshold: float) -> str:
    """Threshold a valence; ties at exactly +-threshold stay neutral."""
    if valence > threshold:
        return POSITIVE
    if valence < -threshold:
        return NEGATIVE
    return NEUTRAL


@dataclass(frozen=True)
class RuleConfig:
    """Numeric policy for the rule engine.

    negation shifts a subtree total toward zero by ``negation_shift`` and
    clamps the result to [-negation_cap, +negation_cap]; an adversative
    marker reweights the material before/after it by ``adversative_weights``.
    """

    negation_shift: float = 4.0
    negation_cap: float = 5.0
    adversative_weights: Tuple[float, float] = (0.5, 1.5)
    neutral_threshold: float = 0.5
    negation_scope: str = HEAD_SUBTREE

    def __post_init__(self) -> None:
        weights = tuple(float(w) for w in self.adversative_weights)
        if len(weights) != 2:
            raise RuleError(f"adversative_weights needs 2 values, got {len(weights)}")
        object.__setattr__(self, "adversative_weights", weights)
        object.__setattr__(self, "negation_shift", float(self.negation_shift))
        object.__setattr__(self, "negation_cap", float(self.negation_cap))
        object.__setattr__(self, "neutral_threshold", float(self.neutral_threshold))
        if self.negation_shift < 0:
            raise RuleError(f"negation_shift must be >= 0, got {self.negation_shift}")
        if not 0 < self.negation_cap <= 5:
            raise RuleError(f"negation_cap must be in (0, 5], got {self.negation_cap}")
        if any(w < 0 for w in weights):
            raise RuleError(f"adversative_weights must be >= 0, got {weights}")
        if self.neutral_threshold < 0:
            raise RuleError(f"neutral_threshold must be >= 0, got {self.neutral_threshold}")
        if self.negation_scope != HEAD_SUBTREE:
            raise RuleError(
                f"unsupported negation_scope {self.negation_scope!r}; only {HEAD_SUBTREE}"
            )

    @classmethod
    def from_file(cls, source: Source) -> "RuleConfig":
        """Parse a flat ``key = value`` file; keys are the field names."""
        values: dict = {}
        for lineno, raw in enumerate(iter_lines(source), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = (part.strip() for part in line.partition("="))
            if not sep or not key:
                raise RuleError(f"expected 'key = value', got {line!r}", lineno)
            if key in values:
                raise RuleError(f"duplicate key {key!r}", lineno)
            try:
                if key in ("negation_shift", "negation_cap", "neutral_threshold"):
                    values[key] = float(value)
                elif key == "adversative_weights":
                    values[key] = tuple(float(part) for part in value.split(","))
                elif key == "negation_scope":
                    values[key] = value
                else:
                    raise RuleError(f"unknown key {key!r}", lineno)
            except ValueError as exc:
                if isinstance(exc, RuleError):
                    raise
                raise RuleError(f"bad value for {key!r}: {value!r}", lineno) from None
        return cls(**values)


class TraceStep(NamedTuple):
    """One rule application: token it applied at, values before and after."""

    token_id: int
    rule: str
    before: float
    after: float
    note: str = ""


@dataclass(frozen=True)
class TargetOpinion:
    """Sentiment attributed to one nominal target span."""

    target_token_ids: Tuple[int, ...]
    target_text: str
    valence: float
    opinion_class: str
    evidence_token_ids: Tuple[int, ...]

    def __post_init__(self) -> None:
        span = tuple(self.target_token_ids)
        object.__setattr__(self, "target_token_ids", span)
        object.__setattr__(self, "evidence_token_ids", tuple(self.evidence_token_ids))
        if not span:
            raise RuleError("target span must be non-empty")
        if list(span) != list(range(span[0], span[-1] + 1)):
            raise RuleError(f"target span must be contiguous, got {span}")
        if self.opinion_class not in CLASSES:
            raise RuleError(f"bad opinion class {self.opinion_class!r}")
        if self.opinion_class != NEUTRAL and not self.evidence_token_ids:
            raise RuleError("non-neutral opinion needs evidence tokens")


@dataclass(frozen=True)
class SentimentResult:
    """Sentence-level score plus per-target opinions and the full trace."""

    sentence_valence: float
    sentence_class: str
    opinions: Tuple[TargetOpinion, ...] = ()
    trace: Tuple[TraceStep, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "opinions", tuple(self.opinions))
        object.__setattr__(self, "trace", tuple(self.trace))
        if self.sentence_class not in CLASSES:
            raise RuleError(f"bad sentence class {self.sentence_class!r}")


class _Composition(NamedTuple):
    valence: float
    trace: List[TraceStep]
    contribution: List[float]  # indexed by token id; [0] unused
    lemmas: List[str]  # after the collocation pre-pass


def _post_order(tree: DepTree) -> List[int]:
    # reversed right-to-left pre-order = left-to-right post-order
    order: List[int] = []
    stack = [tree.root_id]
    children = tree.children
    while stack:
        node = stack.pop()
        order.append(node)
        stack.extend(children[node])
    order.reverse()
    return order


def _compose(tree: DepTree, lex: PolarityLexicon, cfg: RuleConfig) -> _Composition:
    n = len(tree)
    lemmas = merge_collocations([tok.lemma for tok in tree.tokens], lex.collocations)
    shifter = [None] + [
        lex.classify_shifter(lemma) if lemma else None for lemma in lemmas
    ]
    children = tree.children
    contribution = [0.0] * (n + 1)
    subtree = [0.0] * (n + 1)
    trace: List[TraceStep] = []

    for node in _post_order(tree):
        token = tree.tokens[node - 1]
        lemma = lemmas[node - 1]
        base = lex.lookup(lemma, token.upos) if lemma else None
        value = 0.0 if base is None else float(base)
        if value != 0.0:
            trace.append(TraceStep(node, LEXICON, 0.0, value, lemma))
        for dep in children[node]:
            kind = shifter[dep]
            if kind is not None and kind.kind == _INT_KIND and value != 0.0:
                scaled = value * (1.0 + kind.strength)
                trace.append(TraceStep(node, INTENSIFY, value, scaled, lemmas[dep - 1]))
                value = scaled
        contribution[node] = value
        total = value + sum(subtree[dep] for dep in children[node])
        for dep in children[node]:
            kind = shifter[dep]
            if kind is None or kind.kind != _NEG_KIND:
                continue
            if total == 0.0:
                trace.append(TraceStep(node, NEGATE, 0.0, 0.0, "vacuous"))
                continue
            shifted = total - math.copysign(cfg.negation_shift, total)
            clamped = max(-cfg.negation_cap, min(cfg.negation_cap, shifted))
            trace.append(TraceStep(node, NEGATE, total, clamped, lemmas[dep - 1]))
            contribution[node] += clamped - total
            total = clamped
        subtree[node] = total

    sentence = subtree[tree.root_id]
    pivot = next(
        (
            node
            for node in range(1, n + 1)
            if shifter[node] is not None and shifter[node].kind == _ADV_KIND
        ),
        None,
    )
    if pivot is not None:
        before = sum(contribution[i] for i in range(1, pivot))
        after = sum(contribution[i] for i in range(pivot + 1, n + 1))
        w_before, w_after = cfg.adversative_weights
        weighted = w_before * before + w_after * after
        trace.append(
            TraceStep(
                pivot,
                ADVERSATIVE,
                sentence,
                weighted,
                f"{w_before:g}*before + {w_after:g}*after",
            )
        )
        sentence = weighted
    trace.append(
        TraceStep(0, AGGREGATE, sentence, sentence, classify_valence(sentence, cfg.neutral_threshold))
    )
    return _Composition(sentence, trace, contribution, lemmas)


def score_tree(
    tree: DepTree, lex: PolarityLexicon, cfg: RuleConfig
) -> Tuple[float, List[TraceStep]]:
    """Sentence valence and the trace of every rule application."""
    composed = _compose(tree, lex, cfg)
    return composed.valence, composed.trace


def replay_trace(trace: Sequence[TraceStep]) -> float:
    """Re-run a trace against a zero accumulator.

    Node-level steps fold in their delta; sentence-level steps re-assign the
    accumulator outright, so the replayed value matches the engine exactly.
    """
    acc = 0.0
    for step in trace:
        if step.rule in (ADVERSATIVE, AGGREGATE):
            acc = step.after
        else:
            acc += step.after - step.before
    return acc


def classify_sentence(tree: DepTree, lex: PolarityLexicon, cfg: RuleConfig) -> SentimentResult:
    """Sentence-level result only; no target opinions."""
    valence, trace = score_tree(tree, lex, cfg)
    return SentimentResult(
        valence, classify_valence(valence, cfg.neutral_threshold), (), tuple(trace)
    )


def _base_deprel(deprel: str) -> str:
    return deprel.split(":", 1)[0]


def _target_candidates(tree: DepTree) -> List[Tuple[int, Tuple[int, ...]]]:
    children = tree.children
    tokens = tree.tokens
    candidates = []
    for node in range(1, len(tree) + 1):
        token = tokens[node - 1]
        if token.upos not in _NOUN_TAGS:
            continue
        # a nominal hanging off another nominal as part of a compound/flat/
        # amod chain belongs to the bigger span, not to a span of its own
        if token.head != 0:
            head_token = tokens[token.head - 1]
            if (
                _base_deprel(token.deprel) in _NOMINAL_MODIFIERS
                and head_token.upos in _NOUN_TAGS
            ):
                continue
        modifier_deps = {
            dep
            for dep in children[node]
            if _base_deprel(tokens[dep - 1].deprel) in _NOMINAL_MODIFIERS
        }
        lo = node
        while lo - 1 in modifier_deps:
            lo -= 1
        hi = node
        while hi + 1 in modifier_deps:
            hi += 1
        candidates.append((node, tuple(range(lo, hi + 1))))
    candidates.sort(key=lambda item: item[1][0])
    return candidates


def extract_targets(tree: DepTree) -> List[Tuple[int, ...]]:
    """Candidate aspect spans, left to right: nominal heads plus their
    adjacent compound/flat/amod dependents."""
    return [span for _head, span in _target_candidates(tree)]


def _opinion(
    tree: DepTree,
    lex: PolarityLexicon,
    cfg: RuleConfig,
    head: int,
    span: Tuple[int, ...],
    composed: _Composition,
) -> TargetOpinion:
    tokens = tree.tokens
    children = tree.children
    head_token = tokens[head - 1]
    evidence = set()
    # adjectival / participial modifiers of the target head
    for dep in children[head]:
        if _base_deprel(tokens[dep - 1].deprel) in ("amod", "acl"):
            evidence.add(dep)
    relation = _base_deprel(head_token.deprel)
    governor = head_token.head
    if governor != 0:
        governor_token = tokens[governor - 1]
        if relation == "nsubj":
            # copular or adjectival predicate the target is subject of
            has_copula = any(
                _base_deprel(tokens[dep - 1].deprel) == "cop"
                for dep in children[governor]
            )
            if has_copula or governor_token.upos == "ADJ":
                evidence.add(governor)
        elif relation in ("obj", "iobj", "obl") and governor_token.upos == "VERB":
            base = lex.lookup(composed.lemmas[governor - 1] or "", governor_token.upos)
            if base:
                evidence.add(governor)
    weighed = [(e, composed.contribution[e]) for e in sorted(evidence)]
    kept = [(e, v) for e, v in weighed if v != 0.0]
    valence = sum(v for _e, v in kept)
    return TargetOpinion(
        span,
        " ".join(tokens[i - 1].form for i in span),
        valence,
        classify_valence(valence, cfg.neutral_threshold),
        tuple(e for e, _v in kept),
    )


def score_target(
    tree: DepTree,
    lex: PolarityLexicon,
    cfg: RuleConfig,
    target: Sequence[int],
) -> TargetOpinion:
    """Opinion for one candidate span previously produced by extract_targets."""
    span = tuple(target)
    for head, candidate in _target_candidates(tree):
        if candidate == span:
            return _opinion(tree, lex, cfg, head, span, _compose(tree, lex, cfg))
    raise RuleError(f"target span {span} is not a candidate of this tree")


def analyze(tree: DepTree, lex: PolarityLexicon, cfg: RuleConfig) -> SentimentResult:
    """Full pipeline: sentence score plus one opinion per surviving target."""
    composed = _compose(tree, lex, cfg)
    opinions = []
    for head, span in _target_candidates(tree):
        opinion = _opinion(tree, lex, cfg, head, span, composed)
        if opinion.opinion_class == NEUTRAL and not opinion.evidence_token_ids:
            continue
        opinions.append(opinion)
    return SentimentResult(
        composed.valence,
        classify_valence(composed.valence, cfg.neutral_threshold),
        tuple(opinions),
        tuple(composed.trace),
    )


def baseline_wordcount(
    tokens: Union[DepTree, Iterable[Token]],
    lex: PolarityLexicon,
    cfg: RuleConfig,
) -> Tuple[float, str]:
    """Plain valence sum over tokens: no syntax, no shifters."""
    if isinstance(tokens, DepTree):
        tokens = tokens.tokens
    valence = 0.0
    for token in tokens:
        hit = lex.lookup(token.lemma, token.upos)
        if hit is not None:
            valence += hit
    return valence, classify_valence(valence, cfg.neutral_threshold)
