"""Shared fixtures: deterministic stand-in parser commands."""

import shlex
import sys

import pytest

MOCK_PARSER = '''\
import sys

GENDERS = ("Masc", "Fem", "Neut")

for line in sys.stdin.read().splitlines():
    words = line.split()
    if not words:
        continue
    print(f"# text = {line}")
    for i, word in enumerate(words, start=1):
        last = i == len(words)
        upos = "NOUN" if last else "ADJ"
        feats = f"Gender={GENDERS[len(word) % 3]}" if last else "_"
        head = 0 if last else len(words)
        deprel = "root" if last else "amod"
        print("\\t".join([str(i), word, word.lower(), upos, "_", feats,
                          str(head), deprel, "_", "_"]))
    print()
'''

# Same sentences, but lazy about layout: nine columns, empty XPOS field,
# and double blank lines between sentences.
SLOPPY_PARSER = '''\
import sys

for line in sys.stdin.read().splitlines():
    words = line.split()
    if not words:
        continue
    for i, word in enumerate(words, start=1):
        last = i == len(words)
        print("\\t".join([str(i), word, word.lower(),
                          "NOUN" if last else "ADJ", "",
                          "Gender=Fem" if last else "_",
                          str(0 if last else len(words)),
                          "root" if last else "amod", "_"]))
    print()
    print()
'''

CRASHING_PARSER = 'import sys\nsys.exit("boom")\n'


def command_for(script_path):
    return f"{shlex.quote(sys.executable)} {shlex.quote(str(script_path))}"


def write_parser(tmp_path, name, source):
    script = tmp_path / name
    script.write_text(source, encoding="utf-8")
    return command_for(script)


@pytest.fixture
def mock_parser(tmp_path):
    return write_parser(tmp_path, "mock_parser.py", MOCK_PARSER)


@pytest.fixture
def sloppy_parser(tmp_path):
    return write_parser(tmp_path, "sloppy_parser.py", SLOPPY_PARSER)


@pytest.fixture
def crashing_parser(tmp_path):
    return write_parser(tmp_path, "crashing_parser.py", CRASHING_PARSER)
