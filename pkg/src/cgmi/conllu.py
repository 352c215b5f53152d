"""Reading, validating, and writing CoNLL-U dependency treebanks.

Only plain word tokens are represented.  Multiword-token ranges (``1-2``)
and empty nodes (``1.1``) are recognized and skipped so that the remaining
indices stay 1-based and contiguous.
"""

from __future__ import annotations

import gzip
import io
import os
from dataclasses import dataclass, field

GZIP_MAGIC = b"\x1f\x8b"
N_COLUMNS = 10


class ConlluParseError(ValueError):
    """A malformed CoNLL-U line. Carries the 1-based line number."""

    def __init__(self, message, line_number):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class Token:
    index: int            # 1-based position within the sentence
    form: str
    lemma: str
    upos: str
    feats: dict
    head: int             # 0 = sentence root
    deprel: str


@dataclass(frozen=True)
class Sentence:
    tokens: tuple

    def __len__(self):
        return len(self.tokens)

    def token_by_index(self, index):
        return self.tokens[index - 1]


@dataclass
class ParseDiagnostics:
    """Counters for recoverable, sentence-level problems."""

    sentences_ok: int = 0
    sentences_skipped: int = 0
    warnings: list = field(default_factory=list)

    def warn(self, message):
        self.sentences_skipped += 1
        self.warnings.append(message)


def parse_feats(text):
    """Parse a FEATS column (``A=x|B=y`` or ``_``) into a dict."""
    if text == "_" or text == "":
        return {}
    feats = {}
    for item in text.split("|"):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"feature without '=': {item!r}")
        feats[key] = value
    return feats


def format_feats(feats):
    if not feats:
        return "_"
    return "|".join(f"{k}={v}" for k, v in sorted(feats.items()))


def _unescape(column):
    return "" if column == "_" else column


def _parse_token_line(line, line_number):
    columns = line.split("\t")
    if len(columns) != N_COLUMNS:
        raise ConlluParseError(
            f"expected {N_COLUMNS} tab-separated columns, got {len(columns)}",
            line_number,
        )
    idx = columns[0]
    if "-" in idx or "." in idx:
        # Multiword-token range or empty node: legal, but never indexed.
        return None
    if not idx.isdigit():
        raise ConlluParseError(f"non-numeric token index {idx!r}", line_number)
    if not columns[6].isdigit():
        raise ConlluParseError(f"non-numeric head {columns[6]!r}", line_number)
    try:
        feats = parse_feats(columns[5])
    except ValueError as exc:
        raise ConlluParseError(str(exc), line_number) from None
    return Token(
        index=int(idx),
        form=_unescape(columns[1]),
        lemma=_unescape(columns[2]),
        upos=_unescape(columns[3]),
        feats=feats,
        head=int(columns[6]),
        deprel=_unescape(columns[7]),
    )


def _finish_sentence(tokens, first_line, diagnostics):
    for position, token in enumerate(tokens, start=1):
        if token.index != position:
            diagnostics.warn(
                f"sentence at line {first_line}: token indices not contiguous "
                f"(saw {token.index} at position {position})"
            )
            return None
    for token in tokens:
        if not 0 <= token.head <= len(tokens):
            diagnostics.warn(
                f"sentence at line {first_line}: head {token.head} of token "
                f"{token.index} out of range"
            )
            return None
    return Sentence(tokens=tuple(tokens))


def parse_conllu_lines(lines, diagnostics=None, strict=False):
    """Yield Sentence values from an iterable of text lines.

    Malformed lines raise ConlluParseError.  Structural problems (head out
    of range, non-contiguous indices) skip the sentence and increment the
    diagnostics counter; with strict=True they raise instead.
    """
    if diagnostics is None:
        diagnostics = ParseDiagnostics()
    tokens = []
    first_line = None
    line_number = 0

    def emit():
        nonlocal tokens, first_line
        if not tokens:
            return None
        sentence = _finish_sentence(tokens, first_line, diagnostics)
        tokens = []
        first_line = None
        if sentence is None and strict:
            raise ConlluParseError(diagnostics.warnings[-1], line_number)
        if sentence is not None:
            diagnostics.sentences_ok += 1
        return sentence

    for line_number, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if line == "":
            sentence = emit()
            if sentence is not None:
                yield sentence
            continue
        if line.startswith("#"):
            continue
        token = _parse_token_line(line, line_number)
        if token is None:
            continue
        if first_line is None:
            first_line = line_number
        tokens.append(token)
    sentence = emit()
    if sentence is not None:
        yield sentence


def _as_text_lines(source):
    if isinstance(source, bytes):
        if source.startswith(GZIP_MAGIC):
            source = gzip.decompress(source)
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, str):
        return io.StringIO(source)
    if isinstance(source, (os.PathLike,)):
        return open_conllu(source)
    raw = getattr(source, "buffer", source)
    if hasattr(raw, "peek"):
        head = raw.peek(2)[:2]
        if head == GZIP_MAGIC:
            return io.TextIOWrapper(gzip.GzipFile(fileobj=raw), encoding="utf-8")
    if isinstance(source.read(0), bytes):
        return io.TextIOWrapper(source, encoding="utf-8")
    return source


def open_conllu(path):
    """Open a CoNLL-U file as a text stream, transparently ungzipping."""
    handle = open(path, "rb")
    if handle.peek(2)[:2] == GZIP_MAGIC:
        return io.TextIOWrapper(gzip.GzipFile(fileobj=handle), encoding="utf-8")
    return io.TextIOWrapper(handle, encoding="utf-8")


def parse_conllu(source, diagnostics=None, strict=False):
    """Parse CoNLL-U text, bytes, a path, or an open stream into Sentences.

    Gzip input is detected by magic bytes.  Returns an iterator.
    """
    return parse_conllu_lines(_as_text_lines(source), diagnostics, strict)


def read_conllu(path, diagnostics=None, strict=False):
    """Parse all sentences of a (possibly gzipped) CoNLL-U file."""
    with open_conllu(path) as stream:
        return list(parse_conllu_lines(stream, diagnostics, strict))


def _escape(value):
    return value if value != "" else "_"


def sentence_to_conllu(sentence):
    """Render a Sentence back to a CoNLL-U block (no trailing blank line)."""
    lines = []
    for token in sentence.tokens:
        lines.append(
            "\t".join(
                [
                    str(token.index),
                    _escape(token.form),
                    _escape(token.lemma),
                    _escape(token.upos),
                    "_",
                    format_feats(token.feats),
                    str(token.head),
                    _escape(token.deprel),
                    "_",
                    "_",
                ]
            )
        )
    return "\n".join(lines)


def write_conllu(sentences, stream):
    """Write sentences as CoNLL-U blocks separated by blank lines."""
    for sentence in sentences:
        stream.write(sentence_to_conllu(sentence))
        stream.write("\n\n")
