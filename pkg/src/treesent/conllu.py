"""Streaming CoNLL-U reader and writer.

Only the columns the pipeline uses are retained: ID, FORM, LEMMA, UPOS,
HEAD, DEPREL, plus ``#`` comment metadata. The remaining columns are
written back as underscores. Multiword token ranges (``1-2``) and empty
nodes (``1.1``) are dropped silently, with a tally kept in ``ReadStats``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Union

from .tree import DepTree, Token, TreeError

Source = Union[str, Path, IO[bytes], IO[str], Iterable[str]]

_RANGE_ID = re.compile(r"^\d+-\d+$")
_EMPTY_ID = re.compile(r"^\d+\.\d+$")
_COLUMNS = 10


class ConlluError(ValueError):
    """A sentence that cannot be read, with its ordinal and line number."""

    def __init__(self, message: str, sentence: int, line: int):
        super().__init__(f"sentence {sentence} (line {line}): {message}")
        self.sentence = sentence
        self.line = line


@dataclass
class ReadStats:
    """Tallies filled in by ``read_conllu`` as it goes."""

    sentences: int = 0
    skipped: int = 0
    dropped_ranges: int = 0
    dropped_empty_nodes: int = 0


def iter_lines(source: Source) -> Iterator[str]:
    """Lines from a path, a text or byte stream, or any line iterable."""
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            for raw in fh:
                yield raw.decode("utf-8")
        return
    for raw in source:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        yield raw


def _parse_block(
    lines: list[tuple[int, str]], ordinal: int, stats: ReadStats
) -> DepTree:
    metadata: dict = {}
    tokens: list[Token] = []
    first_line = lines[0][0]
    for lineno, text in lines:
        if text.startswith("#"):
            body = text[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                metadata[key.strip()] = value.strip()
            elif body:
                metadata[body] = None
            continue
        cols = text.split("\t")
        if len(cols) != _COLUMNS:
            raise ConlluError(
                f"expected {_COLUMNS} columns, got {len(cols)}", ordinal, lineno
            )
        raw_id = cols[0]
        if _RANGE_ID.match(raw_id):
            stats.dropped_ranges += 1
            continue
        if _EMPTY_ID.match(raw_id):
            stats.dropped_empty_nodes += 1
            continue
        try:
            tok_id = int(raw_id)
        except ValueError:
            raise ConlluError(f"non-numeric id {raw_id!r}", ordinal, lineno) from None
        try:
            head = int(cols[6])
        except ValueError:
            raise ConlluError(f"non-numeric head {cols[6]!r}", ordinal, lineno) from None
        tokens.append(Token(tok_id, cols[1], cols[2], cols[3], head, cols[7]))
    sent_id = metadata.get("sent_id") or f"s{ordinal}"
    try:
        return DepTree(tuple(tokens), sentence_id=sent_id, metadata=metadata)
    except TreeError as exc:
        raise ConlluError(str(exc), ordinal, first_line) from None


def read_conllu(
    source: Source,
    on_error: str = "skip",
    stats: ReadStats | None = None,
) -> Iterator[DepTree]:
    """Yield one validated ``DepTree`` per sentence block.

    ``on_error`` is ``"skip"`` (drop bad sentences, count them in
    ``stats.skipped``) or ``"abort"`` (raise ``ConlluError``). Input is
    consumed line by line, whole files are never buffered.
    """
    if on_error not in ("skip", "abort"):
        raise ValueError(f"on_error must be 'skip' or 'abort', got {on_error!r}")
    if stats is None:
        stats = ReadStats()
    block: list[tuple[int, str]] = []
    ordinal = 0
    lineno = 0

    def finish_block() -> DepTree | None:
        nonlocal ordinal
        ordinal += 1
        try:
            tree = _parse_block(block, ordinal, stats)
        except ConlluError:
            if on_error == "abort":
                raise
            stats.skipped += 1
            return None
        stats.sentences += 1
        return tree

    for raw in iter_lines(source):
        lineno += 1
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            if block:
                tree = finish_block()
                block = []
                if tree is not None:
                    yield tree
        else:
            block.append((lineno, line))
    if block:
        tree = finish_block()
        if tree is not None:
            yield tree


def format_sentence(tree: DepTree) -> str:
    """Serialize one tree to a CoNLL-U block (no trailing blank line)."""
    out = []
    for key, value in tree.metadata.items():
        out.append(f"# {key}" if value is None else f"# {key} = {value}")
    for t in tree.tokens:
        out.append(
            f"{t.id}\t{t.form}\t{t.lemma}\t{t.upos}\t_\t_\t{t.head}\t{t.deprel}\t_\t_"
        )
    return "\n".join(out)


def dumps_conllu(trees: Iterable[DepTree]) -> str:
    """All sentences as one CoNLL-U string, deterministic for equal input."""
    return "".join(format_sentence(t) + "\n\n" for t in trees)


def write_conllu(trees: Iterable[DepTree], dest: str | Path | IO[str]) -> None:
    """Stream sentences to a path or text file object."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8") as fh:
            for tree in trees:
                fh.write(format_sentence(tree) + "\n\n")
    else:
        for tree in trees:
            dest.write(format_sentence(tree) + "\n\n")
