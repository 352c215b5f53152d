"""Tests for vector tables, their serialization, and similarity scoring."""

import io

import numpy as np
import pytest

from cgmi.vectors import (
    VectorTable,
    cosine,
    evaluate_similarity,
    load_vectors,
    load_vectors_file,
    read_similarity_tsv,
    save_vectors,
    save_vectors_file,
)


def random_table(n=6, dim=4, seed=0):
    rng = np.random.default_rng(seed)
    return VectorTable(
        dim=dim,
        vectors={f"w{i}": rng.normal(size=dim) for i in range(n)},
    )


def test_table_validates_shapes_and_finiteness():
    with pytest.raises(ValueError, match="shape"):
        VectorTable(dim=3, vectors={"a": np.zeros(2)})
    with pytest.raises(ValueError, match="non-finite"):
        VectorTable(dim=2, vectors={"a": np.array([1.0, np.inf])})


def test_table_lookup_protocol():
    table = random_table(n=3)
    assert len(table) == 3
    assert "w1" in table
    assert "zzz" not in table
    assert table.tokens() == ["w0", "w1", "w2"]
    np.testing.assert_array_equal(table["w2"], table.vectors["w2"])


def test_save_load_round_trip_is_lossless():
    """repr-based float serialization reproduces every bit."""
    table = random_table(n=10, dim=7, seed=3)
    buffer = io.StringIO()
    save_vectors(table, buffer)
    again = load_vectors(io.StringIO(buffer.getvalue()))
    assert again.dim == table.dim
    assert again.tokens() == table.tokens()
    for token in table.tokens():
        np.testing.assert_array_equal(again[token], table[token])


def test_save_load_file_round_trip(tmp_path):
    table = random_table(seed=5)
    path = tmp_path / "vecs.txt"
    save_vectors_file(table, path)
    again = load_vectors_file(path)
    for token in table.tokens():
        np.testing.assert_array_equal(again[token], table[token])
    header = path.read_text(encoding="utf-8").splitlines()[0]
    assert header == "6 4"


def test_load_vector_format_errors():
    with pytest.raises(ValueError, match="header"):
        load_vectors(io.StringIO("just one line\n"))
    with pytest.raises(ValueError, match="expected 3"):
        load_vectors(io.StringIO("1 3\nw 0.5 0.5\n"))
    with pytest.raises(ValueError, match="declared 2"):
        load_vectors(io.StringIO("2 2\nw 0.5 0.5\n"))


def test_cosine_basic_geometry():
    assert cosine(np.array([1.0, 0.0]), np.array([2.0, 0.0])) == 1.0
    assert cosine(np.array([1.0, 0.0]), np.array([0.0, 3.0])) == 0.0
    np.testing.assert_allclose(
        cosine(np.array([1.0, 0.0]), np.array([-1.0, 0.0])), -1.0
    )


def test_cosine_zero_vector_compares_as_zero():
    assert cosine(np.zeros(3), np.array([1.0, 2.0, 3.0])) == 0.0


def test_cosine_scale_invariance():
    rng = np.random.default_rng(11)
    for _ in range(20):
        u = rng.normal(size=5)
        v = rng.normal(size=5)
        np.testing.assert_allclose(
            cosine(u, v), cosine(3.7 * u, 0.2 * v), atol=1e-12
        )


def test_similarity_monotone_scores_give_perfect_rho():
    """Human scores ordered exactly like the cosines: rho = 1."""
    table = VectorTable(dim=2, vectors={
        "a": np.array([1.0, 0.0]),
        "b": np.array([1.0, 0.2]),
        "c": np.array([1.0, 1.0]),
        "d": np.array([0.0, 1.0]),
    })
    pairs = [("a", "b", 0.9), ("a", "c", 0.5), ("a", "d", 0.1)]
    rho, coverage = evaluate_similarity(table, pairs)
    assert rho == 1.0
    assert coverage == 1.0


def test_similarity_reversed_scores_give_negative_rho():
    table = VectorTable(dim=2, vectors={
        "a": np.array([1.0, 0.0]),
        "b": np.array([1.0, 0.2]),
        "c": np.array([1.0, 1.0]),
        "d": np.array([0.0, 1.0]),
    })
    pairs = [("a", "b", 0.1), ("a", "c", 0.5), ("a", "d", 0.9)]
    rho, _ = evaluate_similarity(table, pairs)
    assert rho == -1.0


def test_similarity_rho_invariant_under_monotone_transforms():
    """Spearman is a rank statistic: rescaling scores cannot change it."""
    table = random_table(n=8, seed=13)
    rng = np.random.default_rng(13)
    pairs = [
        (f"w{i}", f"w{j}", float(rng.uniform(0, 10)))
        for i in range(8) for j in range(i + 1, 8)
    ]
    rho, _ = evaluate_similarity(table, pairs)
    squashed = [(a, b, np.expm1(0.3 * s)) for a, b, s in pairs]
    rho2, _ = evaluate_similarity(table, squashed)
    np.testing.assert_allclose(rho, rho2, atol=1e-12)


def test_similarity_skips_uncovered_pairs_and_reports_coverage():
    table = VectorTable(dim=2, vectors={
        "a": np.array([1.0, 0.0]),
        "b": np.array([0.5, 0.5]),
        "c": np.array([0.0, 1.0]),
    })
    pairs = [("a", "b", 1.0), ("a", "c", 0.5), ("a", "zzz", 0.2), ("q", "r", 0.7)]
    rho, coverage = evaluate_similarity(table, pairs)
    assert coverage == 0.5
    np.testing.assert_allclose(rho, 1.0, atol=1e-12)


def test_similarity_error_cases():
    table = random_table(n=2)
    with pytest.raises(ValueError, match="no similarity pairs"):
        evaluate_similarity(table, [])
    with pytest.raises(ValueError, match="covered"):
        evaluate_similarity(table, [("x", "y", 1.0)])
    with pytest.raises(ValueError, match="at least two"):
        evaluate_similarity(table, [("w0", "w1", 1.0)])


def test_read_similarity_tsv():
    text = "# comment\nauto\tcar\t8.9\n\nbook\tpaper\t5.0\n"
    pairs = read_similarity_tsv(io.StringIO(text))
    assert pairs == [("auto", "car", 8.9), ("book", "paper", 5.0)]
    with pytest.raises(ValueError, match="line 1"):
        read_similarity_tsv(io.StringIO("one two\n"))
