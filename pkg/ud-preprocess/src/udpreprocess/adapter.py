"""Raw text to CoNLL-U through an external tokenizer/lemmatizer/parser.

The adapter owns none of the linguistics.  It feeds batches of text to a
parser backend, normalizes the column layout of whatever comes back, and
stamps a provenance header.  All filtering and interpretation happen in
the downstream pipeline, so there is exactly one source of truth for
extraction rules.

Backends:
  - default: the stanza pipeline, when the package is importable;
  - command: any executable that reads raw UTF-8 text on stdin and writes
    CoNLL-U on stdout, configured as a command line (``{lang}`` expands to
    the language code).
"""

from __future__ import annotations

import shlex
import shutil
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__

KNOWN_LANGUAGES = ("de", "es", "he", "pl", "pt")
N_COLUMNS = 10


class ModelUnavailable(RuntimeError):
    """The configured parser backend cannot run; the message says how to fix it."""


class InputEncodingError(ValueError):
    """Undecodable input. Carries the 1-based line number."""

    def __init__(self, message, line_number):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass
class AdapterConfig:
    language: str
    model: str = None            # parser command line; None selects stanza
    batch_size: int = 100        # input lines handed to the parser at once
    workers: int = 1
    input: str = None
    output: str = None
    extra_languages: tuple = ()

    def __post_init__(self):
        self.extra_languages = tuple(self.extra_languages)
        known = KNOWN_LANGUAGES + self.extra_languages
        if self.language not in known:
            raise ValueError(
                f"unsupported language {self.language!r}; expected one of "
                f"{', '.join(KNOWN_LANGUAGES)} (extend with extra_languages)"
            )
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def _stanza_backend(config):
    try:
        import stanza
    except ImportError:
        raise ModelUnavailable(
            f"no parser available for {config.language!r}: the stanza package "
            f"is not installed. Install it with 'pip install stanza', fetch "
            f"the model with \"python -c 'import stanza; "
            f"stanza.download(\\\"{config.language}\\\")'\", or pass --model "
            f"with an external parser command."
        ) from None
    try:
        pipeline = stanza.Pipeline(
            lang=config.language,
            processors="tokenize,mwt,pos,lemma,depparse",
            verbose=False,
        )
    except Exception as err:
        raise ModelUnavailable(
            f"stanza could not load a {config.language!r} model ({err}); "
            f"fetch it with \"python -c 'import stanza; "
            f"stanza.download(\\\"{config.language}\\\")'\""
        ) from err

    def parse(text):
        return "{:C}\n\n".format(pipeline(text))

    return parse, f"stanza {getattr(stanza, '__version__', 'unknown')}"


def _command_backend(config):
    argv = [part.replace("{lang}", config.language)
            for part in shlex.split(config.model)]
    if not argv:
        raise ValueError("parser command is empty")
    executable = argv[0]
    found = shutil.which(executable) or (
        executable if Path(executable).is_file() else None
    )
    if found is None:
        raise ModelUnavailable(
            f"parser command {executable!r} not found on PATH; install the "
            f"parser or point --model at its full path"
        )

    def parse(text):
        proc = subprocess.run(
            argv, input=text.encode("utf-8"),
            stdout=subprocess.PIPE, stderr=subprocess.PIPE,
        )
        if proc.returncode != 0:
            detail = proc.stderr.decode("utf-8", "replace").strip()
            raise RuntimeError(
                f"parser command failed with status {proc.returncode}"
                + (f": {detail}" if detail else "")
            )
        return proc.stdout.decode("utf-8")

    return parse, f"command {executable}"


def load_backend(config):
    """Resolve the parser backend: (parse callable, identity string)."""
    if config.model:
        return _command_backend(config)
    return _stanza_backend(config)


def read_input_lines(source):
    """Input lines from a path, bytes, or text stream, strict UTF-8.

    Decoding is done line by line so an encoding error can name the
    offending line.
    """
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    elif isinstance(source, bytes):
        data = source
    else:
        text = source.read()
        if isinstance(text, str):
            return text.splitlines()
        data = text
    lines = []
    for number, raw in enumerate(data.split(b"\n"), start=1):
        try:
            lines.append(raw.decode("utf-8"))
        except UnicodeDecodeError as err:
            raise InputEncodingError(
                f"invalid UTF-8 at byte offset {err.start}", number
            ) from None
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def normalize_columns(text):
    """Normalize parser output layout to strict 10-column CoNLL-U.

    Touches layout only: short token rows are padded with ``_``, empty
    fields become ``_``, runs of blank lines collapse, and every sentence
    block ends with one blank line.  Anything else is the parser's to get
    right.
    """
    blocks = []
    current = []
    for raw in text.splitlines():
        line = raw.rstrip()
        if not line:
            if current:
                blocks.append(current)
                current = []
            continue
        if line.startswith("#"):
            current.append(line)
            continue
        columns = line.split("\t")
        if len(columns) > N_COLUMNS:
            raise ValueError(
                f"parser produced {len(columns)} columns: {line[:60]!r}"
            )
        columns += ["_"] * (N_COLUMNS - len(columns))
        current.append("\t".join(c if c else "_" for c in columns))
    if current:
        blocks.append(current)
    return "".join("\n".join(block) + "\n\n" for block in blocks)


def _batches(lines, size):
    content = [line for line in lines if line.strip()]
    for start in range(0, len(content), size):
        yield "\n".join(content[start:start + size])


def raw_to_conllu(source, config: AdapterConfig) -> str:
    """Convert raw text to a CoNLL-U document string.

    Batches are parsed in parallel (``config.workers``) and concatenated
    in input order.  The returned document starts with a provenance
    header recording the adapter version, language, and parser identity.
    """
    lines = read_input_lines(source)
    parse, parser_id = load_backend(config)
    header = (
        f"# generator = ud-preprocess {__version__}\n"
        f"# language = {config.language}\n"
        f"# parser = {parser_id}\n"
    )
    batches = list(_batches(lines, config.batch_size))
    if not batches:
        return header
    if config.workers == 1:
        parts = [parse(batch) for batch in batches]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(parse, batches))
    return header + "".join(normalize_columns(part) for part in parts)


def convert_file(config: AdapterConfig) -> int:
    """Run raw_to_conllu from config.input to config.output.

    Returns the number of bytes written.
    """
    if not config.input or not config.output:
        raise ValueError("config.input and config.output are required")
    document = raw_to_conllu(Path(config.input), config)
    data = document.encode("utf-8")
    Path(config.output).write_bytes(data)
    return len(data)
