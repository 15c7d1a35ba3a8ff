"""Reading CoNLL-U treebanks into sentence/token records and gating corpora by size."""

from __future__ import annotations

import csv
import enum
import io
import itertools
from dataclasses import dataclass, field
from os import PathLike
from pathlib import Path
from typing import Iterable, Iterator, Sequence, TextIO

DEFAULT_MAX_LINES = 50000

# Sentinel in a line stream marking a boundary between concatenated files.
_FILE_BREAK = None


class POSTag(str, enum.Enum):
    ADJ = "ADJ"
    ADP = "ADP"
    ADV = "ADV"
    AUX = "AUX"
    CCONJ = "CCONJ"
    DET = "DET"
    INTJ = "INTJ"
    NOUN = "NOUN"
    NUM = "NUM"
    PART = "PART"
    PRON = "PRON"
    PROPN = "PROPN"
    PUNCT = "PUNCT"
    SCONJ = "SCONJ"
    SYM = "SYM"
    VERB = "VERB"
    X = "X"

    def __str__(self) -> str:
        return self.value


UPOS_ORDER: tuple[POSTag, ...] = tuple(POSTag)


class ConlluError(ValueError):
    """Malformed CoNLL-U input. ``lineno`` is 1-based within the stream."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class TokenRecord:
    index: int
    form: str
    lemma: str
    upos: POSTag
    head: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"token index must be >= 1, got {self.index}")
        if self.head < 0:
            raise ValueError(f"head must be >= 0, got {self.head}")
        if self.head == self.index:
            raise ValueError(f"token {self.index} is its own head")


Sentence = tuple[TokenRecord, ...]


@dataclass
class CorpusSample:
    language: str
    sentences: list[Sentence] = field(default_factory=list)
    lines_read: int = 0

    @property
    def token_count(self) -> int:
        return sum(len(s) for s in self.sentences)

    def tokens(self) -> Iterator[TokenRecord]:
        return itertools.chain.from_iterable(self.sentences)


def _is_word_id(raw: str) -> bool:
    # "1-2" multiword ranges and "1.1" empty nodes are skipped
    return raw.isdigit()


def _close_sentence(tokens: list[TokenRecord], first_line: int) -> Sentence:
    ids = {t.index for t in tokens}
    for t in tokens:
        if t.head != 0 and t.head not in ids:
            raise ConlluError(
                f"token {t.index} ({t.form!r}) has head {t.head} which is not in the sentence",
                first_line,
            )
    return tuple(tokens)


def _parse_lines(lines: Iterable[str | None], language: str, max_lines: int) -> CorpusSample:
    sample = CorpusSample(language=language)
    current: list[TokenRecord] = []
    sent_start = 0
    lineno = 0
    for line in lines:
        if line is _FILE_BREAK:
            if current:
                sample.sentences.append(_close_sentence(current, sent_start))
                current = []
            if max_lines and lineno >= max_lines:
                break
            continue
        if max_lines and lineno >= max_lines and not current:
            break
        lineno += 1
        text = line.rstrip("\r\n")
        if not text.strip():
            if current:
                sample.sentences.append(_close_sentence(current, sent_start))
                current = []
            continue
        if text.startswith("#"):
            continue
        cols = text.split("\t")
        if len(cols) != 10:
            raise ConlluError(f"expected 10 tab-separated columns, found {len(cols)}", lineno)
        raw_id = cols[0]
        if not _is_word_id(raw_id):
            if "-" in raw_id or "." in raw_id:
                continue
            raise ConlluError(f"invalid token ID {raw_id!r}", lineno)
        try:
            upos = POSTag(cols[3])
        except ValueError:
            raise ConlluError(f"unknown UPOS {cols[3]!r}", lineno) from None
        try:
            head = int(cols[6])
        except ValueError:
            raise ConlluError(f"non-integer HEAD {cols[6]!r}", lineno) from None
        if not current:
            sent_start = lineno
        try:
            current.append(TokenRecord(int(raw_id), cols[1], cols[2], upos, head))
        except ValueError as exc:
            raise ConlluError(str(exc), lineno) from None
    if current:
        sample.sentences.append(_close_sentence(current, sent_start))
    sample.lines_read = lineno
    return sample


def parse_conllu(document: TextIO | Iterable[str] | str, max_lines: int = 0,
                 language: str = "") -> CorpusSample:
    """Parse a CoNLL-U document.

    At most ``max_lines`` physical lines are read (0 means no limit); if the
    limit falls inside a sentence, reading continues to the end of that
    sentence. Comment lines, multiword ranges and empty nodes are counted as
    lines but yield no tokens.
    """
    if max_lines < 0:
        raise ValueError("max_lines must be >= 0")
    if isinstance(document, str):
        document = io.StringIO(document)
    return _parse_lines(document, language, max_lines)


def _iter_files(paths: Sequence[str | PathLike]) -> Iterator[str | None]:
    for p in paths:
        with open(p, encoding="utf-8") as fh:
            yield from fh
        yield _FILE_BREAK


def read_corpus(language: str, paths: Sequence[str | PathLike],
                max_lines: int = DEFAULT_MAX_LINES) -> CorpusSample:
    """Concatenate treebank files in the given order and parse the first ``max_lines`` lines."""
    return _parse_lines(_iter_files(paths), language, max_lines)


def write_conllu(sample: CorpusSample, stream: TextIO) -> None:
    """Serialize the five consumed columns; other columns are written as ``_``."""
    for sent in sample.sentences:
        for t in sent:
            cols = [str(t.index), t.form, t.lemma, t.upos.value, "_", "_", str(t.head), "_", "_", "_"]
            stream.write("\t".join(cols) + "\n")
        stream.write("\n")


@dataclass
class CensusEntry:
    language: str
    lines: int
    passed: bool
    error: str | None = None


@dataclass
class CensusReport:
    threshold: int
    entries: list[CensusEntry]
    curve: dict[int, int]

    @property
    def passing(self) -> list[str]:
        return [e.language for e in self.entries if e.passed]

    def write_csv(self, stream: TextIO) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["language", "lines", "pass"])
        for e in self.entries:
            w.writerow([e.language, e.lines, int(e.passed)])


def count_lines(path: str | PathLike) -> int:
    n = 0
    with open(path, "rb") as fh:
        for _ in fh:
            n += 1
    return n


def corpus_census(corpora: Iterable[tuple[str, str | PathLike | Sequence[str | PathLike]]],
                  threshold: int = DEFAULT_MAX_LINES,
                  grid: Iterable[int] = ()) -> CensusReport:
    """Count physical lines per language and flag languages reaching ``threshold``.

    A language may be given one path or several; their line counts add up.
    Unreadable paths mark that language as failed and the census continues.
    ``curve`` maps each cutoff of ``grid`` to the number of languages with at
    least that many lines.
    """
    entries: list[CensusEntry] = []
    for language, paths in corpora:
        if isinstance(paths, (str, PathLike)):
            paths = [paths]
        try:
            lines = sum(count_lines(p) for p in paths)
        except OSError as exc:
            entries.append(CensusEntry(language, 0, False, str(exc)))
            continue
        entries.append(CensusEntry(language, lines, lines >= threshold))
    readable = [e.lines for e in entries if e.error is None]
    curve = {c: sum(1 for n in readable if n >= c) for c in sorted(set(grid))}
    return CensusReport(threshold, entries, curve)


def discover_ud(root: str | PathLike) -> dict[str, list[Path]]:
    """Map language names to their ``.conllu`` files in a UD release directory.

    ``UD_Old_French-SRCMF`` becomes ``Old French``; files are sorted by path so
    concatenation order is stable.
    """
    out: dict[str, list[Path]] = {}
    for tb in sorted(Path(root).glob("UD_*")):
        if not tb.is_dir():
            continue
        lang = tb.name[3:].split("-", 1)[0].replace("_", " ")
        files = sorted(tb.glob("*.conllu"))
        if files:
            out.setdefault(lang, []).extend(files)
    return out
