"""Tests for CoNLL-U parsing, validation, and round-tripping."""

import gzip
import io
import pathlib

import pytest

from cgmi.conllu import (
    ConlluParseError,
    ParseDiagnostics,
    Sentence,
    Token,
    open_conllu,
    parse_conllu,
    parse_feats,
    read_conllu,
    sentence_to_conllu,
    write_conllu,
)

DATA = pathlib.Path(__file__).parent / "data"

TWO_TOKEN = (
    "1\tmały\tmały\tADJ\t_\tGender=Masc\t2\tamod\t_\t_\n"
    "2\tpies\tpies\tNOUN\t_\tGender=Masc\t0\troot\t_\t_\n"
)


def test_empty_input_yields_no_sentences():
    assert list(parse_conllu("")) == []
    assert list(parse_conllu("\n\n\n")) == []


def test_comment_only_input_yields_no_sentences():
    assert list(parse_conllu("# newdoc\n# text = nic\n")) == []


def test_two_token_sentence_fields():
    """A minimal adjective-noun sentence parses into typed tokens."""
    sentences = list(parse_conllu(TWO_TOKEN))
    assert len(sentences) == 1
    sentence = sentences[0]
    assert len(sentence) == 2

    adj = sentence.token_by_index(1)
    assert adj.form == "mały"
    assert adj.lemma == "mały"
    assert adj.upos == "ADJ"
    assert adj.feats == {"Gender": "Masc"}
    assert adj.head == 2
    assert adj.deprel == "amod"

    noun = sentence.token_by_index(2)
    assert noun.upos == "NOUN"
    assert noun.head == 0
    assert noun.deprel == "root"


def test_blank_line_separates_sentences():
    text = TWO_TOKEN + "\n" + TWO_TOKEN
    sentences = list(parse_conllu(text))
    assert len(sentences) == 2
    assert sentences[0] == sentences[1]


def test_missing_column_raises_with_line_number():
    bad = "1\tmały\tmały\tADJ\t_\tGender=Masc\t2\tamod\t_\n"
    with pytest.raises(ConlluParseError) as exc_info:
        list(parse_conllu(TWO_TOKEN + "\n" + bad))
    assert exc_info.value.line_number == 4
    assert "9" in str(exc_info.value)
    assert "line 4" in str(exc_info.value)


def test_non_numeric_index_raises():
    with pytest.raises(ConlluParseError, match="token index"):
        list(parse_conllu("x\ta\ta\tADJ\t_\t_\t0\troot\t_\t_\n"))


def test_non_numeric_head_raises():
    with pytest.raises(ConlluParseError, match="head"):
        list(parse_conllu("1\ta\ta\tADJ\t_\t_\tq\troot\t_\t_\n"))


def test_multiword_ranges_and_empty_nodes_are_skipped():
    """Range (1-2) and decimal (1.1) ids are dropped, plain ids kept."""
    text = (
        "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n"
        "1\tde\tde\tADP\t_\t_\t2\tcase\t_\t_\n"
        "2\tel\tel\tDET\t_\t_\t0\troot\t_\t_\n"
        "2.1\tnulo\tnulo\tX\t_\t_\t_\t_\t_\t_\n"
    )
    sentences = list(parse_conllu(text))
    assert len(sentences) == 1
    assert [t.index for t in sentences[0].tokens] == [1, 2]


def test_head_out_of_range_skips_sentence_and_warns():
    bad = "1\tmały\tmały\tADJ\t_\t_\t7\tamod\t_\t_\n"
    diagnostics = ParseDiagnostics()
    sentences = list(parse_conllu(bad + "\n" + TWO_TOKEN, diagnostics))
    assert len(sentences) == 1
    assert diagnostics.sentences_ok == 1
    assert diagnostics.sentences_skipped == 1
    assert "head 7" in diagnostics.warnings[0]


def test_non_contiguous_indices_skip_sentence():
    bad = (
        "1\ta\ta\tADJ\t_\t_\t0\troot\t_\t_\n"
        "3\tb\tb\tNOUN\t_\t_\t1\tnsubj\t_\t_\n"
    )
    diagnostics = ParseDiagnostics()
    assert list(parse_conllu(bad, diagnostics)) == []
    assert diagnostics.sentences_skipped == 1


def test_strict_mode_turns_structural_warnings_into_errors():
    bad = "1\tmały\tmały\tADJ\t_\t_\t7\tamod\t_\t_\n"
    with pytest.raises(ConlluParseError, match="head 7"):
        list(parse_conllu(bad, strict=True))


def test_parse_feats_multiple_features():
    feats = parse_feats("Case=Nom|Gender=Fem|Number=Sing")
    assert feats == {"Case": "Nom", "Gender": "Fem", "Number": "Sing"}


def test_parse_feats_underscore_is_empty():
    assert parse_feats("_") == {}


def test_parse_feats_missing_equals_raises():
    with pytest.raises(ValueError, match="'='"):
        parse_feats("Gender")


def test_malformed_feats_column_carries_line_number():
    bad = "1\ta\ta\tADJ\t_\tGender\t0\troot\t_\t_\n"
    with pytest.raises(ConlluParseError, match="line 1"):
        list(parse_conllu(bad))


def test_parse_accepts_bytes_and_streams():
    from_text = list(parse_conllu(TWO_TOKEN))
    from_bytes = list(parse_conllu(TWO_TOKEN.encode("utf-8")))
    from_stream = list(parse_conllu(io.StringIO(TWO_TOKEN)))
    assert from_text == from_bytes == from_stream


def test_parse_accepts_gzip_bytes():
    compressed = gzip.compress(TWO_TOKEN.encode("utf-8"))
    assert list(parse_conllu(compressed)) == list(parse_conllu(TWO_TOKEN))


def test_read_conllu_transparently_ungzips(tmp_path):
    plain = tmp_path / "t.conllu"
    plain.write_text(TWO_TOKEN, encoding="utf-8")
    packed = tmp_path / "t.conllu.gz"
    packed.write_bytes(gzip.compress(TWO_TOKEN.encode("utf-8")))
    assert read_conllu(plain) == read_conllu(packed)
    with open_conllu(packed) as stream:
        assert list(parse_conllu(stream)) == read_conllu(plain)


def test_round_trip_preserves_token_content():
    """parse -> write -> parse is the identity on token fields."""
    sentences = read_conllu(DATA / "sample.conllu")
    assert sentences
    buffer = io.StringIO()
    write_conllu(sentences, buffer)
    again = list(parse_conllu(buffer.getvalue()))
    assert again == sentences


def test_sentence_to_conllu_formats_feats_sorted():
    token = Token(
        index=1, form="domu", lemma="dom", upos="NOUN",
        feats={"Number": "Sing", "Gender": "Masc"}, head=0, deprel="root",
    )
    line = sentence_to_conllu(Sentence(tokens=(token,)))
    assert line.split("\t")[5] == "Gender=Masc|Number=Sing"


def test_bundled_sample_parses_cleanly():
    diagnostics = ParseDiagnostics()
    sentences = read_conllu(DATA / "sample.conllu", diagnostics, strict=True)
    assert len(sentences) == 5
    assert diagnostics.sentences_ok == 5
    assert diagnostics.sentences_skipped == 0
