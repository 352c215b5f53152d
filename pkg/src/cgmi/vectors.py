"""Token-to-vector tables, their text serialization, and similarity scoring.

The file format is the word2vec text layout: a ``count dim`` header line,
then one ``token v1 ... v_dim`` line per token.  Floats are written with
shortest round-trip precision, so save/load is lossless.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import spearmanr


@dataclass
class VectorTable:
    dim: int
    vectors: dict                      # token -> float64 array of length dim
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for token, vector in self.vectors.items():
            vector = np.asarray(vector, dtype=np.float64)
            if vector.shape != (self.dim,):
                raise ValueError(
                    f"vector for {token!r} has shape {vector.shape}, expected ({self.dim},)"
                )
            if not np.all(np.isfinite(vector)):
                raise ValueError(f"vector for {token!r} has non-finite components")
            self.vectors[token] = vector

    def __contains__(self, token):
        return token in self.vectors

    def __getitem__(self, token):
        return self.vectors[token]

    def __len__(self):
        return len(self.vectors)

    def tokens(self):
        return list(self.vectors)


def save_vectors(table, stream):
    """Write a VectorTable in word2vec text format."""
    stream.write(f"{len(table.vectors)} {table.dim}\n")
    for token, vector in table.vectors.items():
        stream.write(token)
        for value in vector:
            stream.write(" " + repr(float(value)))
        stream.write("\n")


def load_vectors(stream, metadata=None):
    """Read a VectorTable from word2vec text format."""
    header = stream.readline().split()
    if len(header) != 2:
        raise ValueError("vector file must start with a 'count dim' header")
    count, dim = int(header[0]), int(header[1])
    vectors = {}
    for line in stream:
        parts = line.rstrip("\n").split(" ")
        if len(parts) != dim + 1:
            raise ValueError(
                f"vector line for {parts[0]!r} has {len(parts) - 1} values, expected {dim}"
            )
        vectors[parts[0]] = np.array([float(v) for v in parts[1:]], dtype=np.float64)
    if len(vectors) != count:
        raise ValueError(f"header declared {count} vectors, file has {len(vectors)}")
    return VectorTable(dim=dim, vectors=vectors, metadata=metadata or {})


def save_vectors_file(table, path):
    with open(path, "w", encoding="utf-8") as stream:
        save_vectors(table, stream)


def load_vectors_file(path):
    with open(path, encoding="utf-8") as stream:
        return load_vectors(stream)


def cosine(u, v):
    """Cosine similarity; zero vectors compare as 0."""
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def evaluate_similarity(table, pairs):
    """Spearman correlation of cosine similarities vs. human scores.

    pairs: iterable of (word1, word2, score).  Pairs with a missing word
    are skipped.  Returns (rho, coverage) where coverage is the kept
    fraction of all pairs.  Raises ValueError when nothing is kept.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no similarity pairs given")
    human = []
    model = []
    for word1, word2, score in pairs:
        if word1 in table and word2 in table:
            human.append(float(score))
            model.append(cosine(table[word1], table[word2]))
    if not human:
        raise ValueError("no similarity pair is covered by the vector table")
    if len(human) == 1:
        raise ValueError("need at least two covered pairs for a rank correlation")
    rho = spearmanr(human, model).statistic
    return float(rho), len(human) / len(pairs)


def read_similarity_tsv(stream):
    """Read ``word1<TAB>word2<TAB>score`` rows."""
    pairs = []
    for line_number, line in enumerate(stream, start=1):
        line = line.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"similarity TSV line {line_number}: expected 3 columns")
        pairs.append((parts[0], parts[1], float(parts[2])))
    return pairs
