"""Tree encodings for sequence labeling, with a repairing decoder.

Three per-word label schemes, all invertible on well-formed input:

* ``REL_OFFSET``: payload is ``head - id``, 0 marks the root.
* ``REL_POS``: payload is ``(upos, k)``, the head is the k-th token with
  that UPOS strictly to the right (k > 0) or left (k < 0) of the word,
  counting outward. The root payload is ``(ROOT, 0)``.
* ``BRACKETS``: two independent balanced bracket planes. A dependent
  with its head to the right writes ``<`` and the head later closes it
  with one ``\\`` per such dependent (nearest open first). A head with
  dependents to the right writes one ``/`` each, closed by ``>`` at the
  dependent. Per-label symbol order is ``\\* <? >? /*``, which is also
  the processing order. Projective trees only; the root writes neither
  ``<`` nor ``>`` and its relation is fixed to ``root``.

Decoding never fails: implausible head proposals are normalized by
``repair``, which counts what it had to change.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import IO, Iterable, Iterator, NamedTuple, Sequence, Union

from .conllu import iter_lines
from .tree import DepTree, Token, crossing_arcs

ROOT_UPOS = "ROOT"

Payload = Union[int, tuple[str, int], str]


class Scheme(enum.Enum):
    REL_OFFSET = "rel-offset"
    REL_POS = "rel-pos"
    BRACKETS = "brackets"

    @classmethod
    def parse(cls, text: str) -> "Scheme":
        key = text.strip().lower().replace("_", "-")
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown scheme {text!r}")


class NonProjectiveError(ValueError):
    """Raised when BRACKETS encoding meets crossing arcs."""

    def __init__(self, pair):
        (h1, d1), (h2, d2) = pair
        super().__init__(
            f"crossing arcs: head {h1} -> dependent {d1} and head {h2} -> dependent {d2}"
        )
        self.arcs = pair


class SyntaxLabel(NamedTuple):
    scheme: Scheme
    payload: Payload
    deprel: str


_BRACKET_PAYLOAD = re.compile(r"^\\*<?>?/*$")


def _payload_ok(scheme: Scheme, payload: Payload) -> bool:
    if scheme is Scheme.REL_OFFSET:
        return isinstance(payload, int)
    if scheme is Scheme.REL_POS:
        return (
            isinstance(payload, tuple)
            and len(payload) == 2
            and isinstance(payload[0], str)
            and payload[0] != ""
            and isinstance(payload[1], int)
        )
    return isinstance(payload, str) and _BRACKET_PAYLOAD.match(payload) is not None


@dataclass(frozen=True)
class LabelSeq:
    """Labels for one sentence, one per token, all in the same scheme."""

    labels: tuple[SyntaxLabel, ...]
    scheme: Scheme
    sentence_polarity: str | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.labels, tuple):
            object.__setattr__(self, "labels", tuple(self.labels))
        if not self.labels:
            raise ValueError("empty label sequence")
        for lab in self.labels:
            if lab.scheme is not self.scheme:
                raise ValueError("mixed schemes in one label sequence")
            if not _payload_ok(self.scheme, lab.payload):
                raise ValueError(f"malformed payload {lab.payload!r} for {self.scheme}")

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class RepairStats:
    """How many head proposals each repair rule had to touch."""

    out_of_range: int = 0
    extra_roots: int = 0
    missing_root: int = 0
    cycles_broken: int = 0

    @property
    def total(self) -> int:
        return self.out_of_range + self.extra_roots + self.missing_root + self.cycles_broken

    def __add__(self, other: "RepairStats") -> "RepairStats":
        return RepairStats(
            self.out_of_range + other.out_of_range,
            self.extra_roots + other.extra_roots,
            self.missing_root + other.missing_root,
            self.cycles_broken + other.cycles_broken,
        )


class DecodeResult(NamedTuple):
    tree: DepTree
    repairs: RepairStats


def encode(tree: DepTree, scheme: Scheme) -> LabelSeq:
    """Labels for a validated tree. BRACKETS requires projectivity."""
    tokens = tree.tokens
    n = len(tokens)
    labels: list[SyntaxLabel] = []
    if scheme is Scheme.REL_OFFSET:
        for t in tokens:
            off = 0 if t.head == 0 else t.head - t.id
            labels.append(SyntaxLabel(scheme, off, t.deprel))
    elif scheme is Scheme.REL_POS:
        for t in tokens:
            if t.head == 0:
                labels.append(SyntaxLabel(scheme, (ROOT_UPOS, 0), t.deprel))
                continue
            tag = tokens[t.head - 1].upos
            if t.head > t.id:
                k = sum(1 for j in range(t.id + 1, t.head + 1) if tokens[j - 1].upos == tag)
            else:
                k = -sum(1 for j in range(t.head, t.id) if tokens[j - 1].upos == tag)
            labels.append(SyntaxLabel(scheme, (tag, k), t.deprel))
    elif scheme is Scheme.BRACKETS:
        pair = crossing_arcs(tree)
        if pair is not None:
            raise NonProjectiveError(pair)
        left_closes = [0] * (n + 1)  # '\' count per head
        right_opens = [0] * (n + 1)  # '/' count per head
        for t in tokens:
            if t.head > t.id:
                left_closes[t.head] += 1
            elif t.head != 0:
                right_opens[t.head] += 1
        for t in tokens:
            sym = "\\" * left_closes[t.id]
            if t.head > t.id:
                sym += "<"
            elif t.head != 0:
                sym += ">"
            sym += "/" * right_opens[t.id]
            deprel = "root" if t.head == 0 else t.deprel
            labels.append(SyntaxLabel(scheme, sym, deprel))
    else:  # pragma: no cover
        raise ValueError(f"unhandled scheme {scheme}")
    return LabelSeq(tuple(labels), scheme)


def repair(proposals: Sequence[int | None], n: int) -> tuple[list[int], RepairStats]:
    """Normalize raw head proposals into a valid head vector.

    Rules, applied in order and counted separately: out-of-range,
    self-pointing or missing proposals become a provisional root; with
    several roots the leftmost stays and the rest attach to it; with no
    root token 1 becomes the root; each remaining cycle is broken by
    reattaching its smallest-id member to the root.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(proposals) != n:
        raise ValueError(f"expected {n} proposals, got {len(proposals)}")
    out_of_range = 0
    heads: list[int] = [0] * (n + 1)
    for i, p in enumerate(proposals, start=1):
        if p is None or p < 0 or p > n or p == i:
            heads[i] = 0
            out_of_range += 1
        else:
            heads[i] = p
    roots = [i for i in range(1, n + 1) if heads[i] == 0]
    extra_roots = 0
    missing_root = 0
    if not roots:
        heads[1] = 0
        root = 1
        missing_root = 1
    else:
        root = roots[0]
        for other in roots[1:]:
            heads[other] = root
            extra_roots += 1
    cycles_broken = 0
    state = [0] * (n + 1)
    for start in range(1, n + 1):
        if state[start]:
            continue
        path = []
        j = start
        while j != 0 and state[j] == 0:
            state[j] = 1
            path.append(j)
            j = heads[j]
        if j != 0 and state[j] == 1:
            cycle = path[path.index(j):]
            heads[min(cycle)] = root
            cycles_broken += 1
        for v in path:
            state[v] = 2
    stats = RepairStats(out_of_range, extra_roots, missing_root, cycles_broken)
    return heads[1:], stats


def _propose_heads(seq: LabelSeq, upos: Sequence[str]) -> list[int | None]:
    n = len(seq.labels)
    scheme = seq.scheme
    if scheme is Scheme.REL_OFFSET:
        return [0 if lab.payload == 0 else i + lab.payload
                for i, lab in enumerate(seq.labels, start=1)]
    if scheme is Scheme.REL_POS:
        proposals: list[int | None] = []
        for i, lab in enumerate(seq.labels, start=1):
            tag, k = lab.payload
            if tag == ROOT_UPOS and k == 0:
                proposals.append(0)
                continue
            found: int | None = None
            if k > 0:
                count = 0
                for j in range(i + 1, n + 1):
                    if upos[j - 1] == tag:
                        count += 1
                        if count == k:
                            found = j
                            break
            elif k < 0:
                count = 0
                for j in range(i - 1, 0, -1):
                    if upos[j - 1] == tag:
                        count += 1
                        if count == -k:
                            found = j
                            break
            proposals.append(found)
        return proposals
    # BRACKETS: scan both planes left to right, stacks give nearest-open
    # matching. Tokens never assigned a head become root proposals.
    proposals = [None] * n
    left_stack: list[int] = []
    right_stack: list[int] = []
    for i, lab in enumerate(seq.labels, start=1):
        sym: str = lab.payload
        pos = 0
        while pos < len(sym) and sym[pos] == "\\":
            if left_stack:
                proposals[left_stack.pop() - 1] = i
            pos += 1
        if pos < len(sym) and sym[pos] == "<":
            left_stack.append(i)
            pos += 1
        if pos < len(sym) and sym[pos] == ">":
            if right_stack:
                proposals[i - 1] = right_stack.pop()
            pos += 1
        while pos < len(sym) and sym[pos] == "/":
            right_stack.append(i)
            pos += 1
    return [0 if p is None else p for p in proposals]


def decode(
    seq: LabelSeq,
    words: Sequence[tuple[str, str]] | None = None,
    sentence_id: str = "",
) -> DecodeResult:
    """Rebuild a tree from labels, repairing whatever does not fit.

    ``words`` supplies (form, upos) per token; REL_POS decoding is only
    meaningful when real UPOS tags are given. Lemmas are set to the
    forms, which is all the label stream carries.
    """
    n = len(seq.labels)
    if words is None:
        words = [(f"w{i}", "X") for i in range(1, n + 1)]
    if len(words) != n:
        raise ValueError(f"expected {n} words, got {len(words)}")
    upos = [w[1] for w in words]
    proposals = _propose_heads(seq, upos)
    heads, stats = repair(proposals, n)
    tokens = tuple(
        Token(i, words[i - 1][0], words[i - 1][0], upos[i - 1], heads[i - 1],
              seq.labels[i - 1].deprel)
        for i in range(1, n + 1)
    )
    return DecodeResult(DepTree(tokens, sentence_id=sentence_id), stats)


def emit_multitask_labels(tree: DepTree, scheme: Scheme, polarity_class: str) -> LabelSeq:
    """Syntax labels plus a sentence polarity tag carried on the sequence."""
    if not polarity_class or any(c.isspace() for c in polarity_class) or "@" in polarity_class:
        raise ValueError(f"bad polarity class {polarity_class!r}")
    return replace(encode(tree, scheme), sentence_polarity=polarity_class)


# ---------------------------------------------------------------------------
# Tagger bridge: one sentence per line,
#   sent_id TAB form/upos/label SPACE form/upos/label ...
# with an optional @class suffix on the last label.

class BridgeError(ValueError):
    """A bridge line that cannot be parsed, with its line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class BridgeStats:
    records: int = 0
    skipped: int = 0
    repairs: RepairStats = RepairStats()


def format_label(label: SyntaxLabel) -> str:
    if label.scheme is Scheme.REL_OFFSET:
        off = label.payload
        text = "0" if off == 0 else f"{off:+d}"
        return f"{text}:{label.deprel}"
    if label.scheme is Scheme.REL_POS:
        tag, k = label.payload
        text = "0" if k == 0 else f"{k:+d}"
        return f"{tag},{text}:{label.deprel}"
    return f"{label.payload}:{label.deprel}"


_REL_OFFSET_LABEL = re.compile(r"^([+-]?\d+):(.*)$")
_REL_POS_LABEL = re.compile(r"^([^,:]+),([+-]?\d+):(.*)$")
# Non-greedy form: the earliest form/upos split that lets the whole field
# parse wins, which keeps bracket symbols out of the upos slot while still
# allowing slashes inside forms.
_BRACKET_FIELD = re.compile(r"^(?P<form>.+?)/(?P<upos>[^/]+)/(?P<sym>[\\<>/]*):(?P<rel>[^/]*)$")


def _parse_field(field: str, scheme: Scheme) -> tuple[str, str, SyntaxLabel]:
    if scheme is Scheme.BRACKETS:
        m = _BRACKET_FIELD.match(field)
        if m is None:
            raise ValueError(f"bad token field {field!r}")
        return m["form"], m["upos"], SyntaxLabel(scheme, m["sym"], m["rel"])
    parts = field.rsplit("/", 2)
    if len(parts) != 3 or not parts[0] or not parts[1]:
        raise ValueError(f"bad token field {field!r}")
    form, upos, raw = parts
    if scheme is Scheme.REL_OFFSET:
        m = _REL_OFFSET_LABEL.match(raw)
        if m is None:
            raise ValueError(f"bad label {raw!r}")
        return form, upos, SyntaxLabel(scheme, int(m.group(1)), m.group(2))
    m = _REL_POS_LABEL.match(raw)
    if m is None:
        raise ValueError(f"bad label {raw!r}")
    return form, upos, SyntaxLabel(scheme, (m.group(1), int(m.group(2))), m.group(3))


def format_tagger_line(tree: DepTree, seq: LabelSeq) -> str:
    """One bridge line for a sentence and its labels."""
    if len(seq.labels) != len(tree.tokens):
        raise ValueError("label count does not match sentence length")
    sent_id = tree.sentence_id or "s"
    if any(c.isspace() for c in sent_id):
        raise ValueError(f"sentence id {sent_id!r} contains whitespace")
    fields = []
    for tok, lab in zip(tree.tokens, seq.labels):
        if any(c.isspace() for c in tok.form):
            raise ValueError(f"form {tok.form!r} contains whitespace")
        fields.append(f"{tok.form}/{tok.upos}/{format_label(lab)}")
    if seq.sentence_polarity:
        fields[-1] += f"@{seq.sentence_polarity}"
    return sent_id + "\t" + " ".join(fields)


def write_tagger_output(
    pairs: Iterable[tuple[DepTree, LabelSeq]], dest: IO[str]
) -> None:
    for tree, seq in pairs:
        dest.write(format_tagger_line(tree, seq) + "\n")


def parse_tagger_output(
    source: Union[str, Path, IO[str], IO[bytes], Iterable[str]],
    scheme: Scheme,
    on_error: str = "skip",
    stats: BridgeStats | None = None,
) -> Iterator[tuple[LabelSeq, DecodeResult]]:
    """Parse bridge lines and decode each one, repairs included.

    Yields ``(labels, decode_result)`` per record. Unparseable records
    are skipped (tallied in ``stats.skipped``) or abort, depending on
    ``on_error``. Blank lines are ignored.
    """
    if on_error not in ("skip", "abort"):
        raise ValueError(f"on_error must be 'skip' or 'abort', got {on_error!r}")
    if stats is None:
        stats = BridgeStats()
    lineno = 0
    for raw in iter_lines(source):
        lineno += 1
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        try:
            yield _parse_bridge_line(line, lineno, scheme, stats)
        except BridgeError:
            if on_error == "abort":
                raise
            stats.skipped += 1


def _parse_bridge_line(
    line: str, lineno: int, scheme: Scheme, stats: BridgeStats
) -> tuple[LabelSeq, DecodeResult]:
    sent_id, tab, rest = line.partition("\t")
    if not tab or not rest.strip():
        raise BridgeError("expected 'sent_id<TAB>token fields'", lineno)
    fields = rest.split(" ")
    polarity = None
    last = fields[-1]
    if "@" in last:
        head_part, _, cls = last.rpartition("@")
        if cls:
            try:
                _parse_field(head_part, scheme)
            except ValueError:
                pass  # the @ belongs to the form, leave the field alone
            else:
                fields[-1] = head_part
                polarity = cls
    words: list[tuple[str, str]] = []
    labels: list[SyntaxLabel] = []
    for field_text in fields:
        try:
            form, upos, label = _parse_field(field_text, scheme)
        except ValueError as exc:
            raise BridgeError(str(exc), lineno) from None
        words.append((form, upos))
        labels.append(label)
    try:
        seq = LabelSeq(tuple(labels), scheme, sentence_polarity=polarity)
    except ValueError as exc:
        raise BridgeError(str(exc), lineno) from None
    result = decode(seq, words, sentence_id=sent_id)
    stats.records += 1
    stats.repairs = stats.repairs + result.repairs
    return seq, result
