"""Noun vectors from a relation graph.

Builds a decayed multi-hop reachability matrix M = sum_k decay^k A^k over a
symmetric adjacency matrix, L2-normalizes its rows, and factorizes it with a
truncated SVD.  Row i of U_d diag(S_d) is the vector for node i.  Isolated
nodes carry no relational signal, so they are excluded from the
factorization and all share the first standard basis vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .vectors import VectorTable

DEFAULT_DECAY = 0.75
DEFAULT_HOPS = 4


@dataclass
class RelationGraph:
    """Undirected graph over string-labelled nodes.

    Edge endpoints may carry relation tags (hypernymy, synonymy, ...); the
    adjacency matrix only asks whether any relation links the pair.
    """

    nodes: tuple
    edges: frozenset = field(default_factory=frozenset)   # of frozenset({a, b})
    relation_tags: dict = field(default_factory=dict)     # sorted pair -> tag tuple

    def __post_init__(self):
        self.nodes = tuple(self.nodes)
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("node labels must be unique")
        known = set(self.nodes)
        for edge in self.edges:
            if len(edge) != 2:
                raise ValueError(f"edge {set(edge)!r} must join two distinct nodes")
            if not edge <= known:
                raise ValueError(f"edge {set(edge)!r} mentions an unknown node")

    @classmethod
    def from_edges(cls, pairs, extra_nodes=()):
        """Build a graph from (a, b) or (a, tag, b) entries.

        Self-loops are dropped; repeated pairs merge their tags.
        """
        nodes = set(extra_nodes)
        edges = set()
        tags = {}
        for entry in pairs:
            if len(entry) == 3:
                a, tag, b = entry
            else:
                (a, b), tag = entry, None
            nodes.add(a)
            nodes.add(b)
            if a == b:
                continue
            edges.add(frozenset((a, b)))
            if tag is not None:
                key = tuple(sorted((a, b)))
                tags.setdefault(key, set()).add(tag)
        return cls(
            nodes=tuple(sorted(nodes)),
            edges=frozenset(edges),
            relation_tags={key: tuple(sorted(v)) for key, v in sorted(tags.items())},
        )

    def __len__(self):
        return len(self.nodes)

    def adjacency(self):
        index = {node: i for i, node in enumerate(self.nodes)}
        matrix = np.zeros((len(self.nodes), len(self.nodes)))
        for edge in self.edges:
            a, b = sorted(edge)
            matrix[index[a], index[b]] = 1.0
            matrix[index[b], index[a]] = 1.0
        return matrix

    def degrees(self):
        return self.adjacency().sum(axis=1)


def read_relations_tsv(source):
    """Read `lemma1<TAB>relation<TAB>lemma2` lines; '#' lines are comments."""
    close = False
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        stream = open(source, encoding="utf-8")
        close = True
    else:
        stream = source
    triples = []
    try:
        for number, raw in enumerate(stream, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ValueError(
                    f"line {number}: expected lemma<TAB>relation<TAB>lemma, "
                    f"got {len(fields)} fields"
                )
            triples.append((fields[0], fields[1], fields[2]))
    finally:
        if close:
            stream.close()
    return RelationGraph.from_edges(triples)


def _fix_signs(components):
    """Make each column's largest-magnitude entry positive."""
    for j in range(components.shape[1]):
        column = components[:, j]
        anchor = np.argmax(np.abs(column))
        if column[anchor] < 0:
            components[:, j] = -column
    return components


def build_graph_vectors(graph, dim, decay=DEFAULT_DECAY, hops=DEFAULT_HOPS):
    """Spectral vectors from decayed multi-hop adjacency.

    Isolated nodes all receive the first standard basis vector and are
    listed in metadata["singletons"].  dim must not exceed the node count;
    dimensions beyond the rank of the reachability matrix are zero.
    """
    if len(graph) == 0:
        raise ValueError("graph has no nodes")
    if dim < 1:
        raise ValueError("dim must be positive")
    if dim > len(graph):
        raise ValueError(f"dim={dim} exceeds node count {len(graph)}")
    if not 0 < decay <= 1:
        raise ValueError("decay must be in (0, 1]")

    adjacency = graph.adjacency()
    degrees = adjacency.sum(axis=1)
    connected = np.flatnonzero(degrees > 0)
    singletons = [graph.nodes[i] for i in np.flatnonzero(degrees == 0)]

    vectors = {}
    basis = np.zeros(dim)
    basis[0] = 1.0
    for label in singletons:
        vectors[label] = basis.copy()

    if connected.size:
        sub = adjacency[np.ix_(connected, connected)]
        reach = np.zeros_like(sub)
        power = np.eye(sub.shape[0])
        for k in range(hops + 1):
            reach += (decay ** k) * power
            if k < hops:
                power = power @ sub
        norms = np.linalg.norm(reach, axis=1, keepdims=True)
        reach = reach / norms
        u, s, _ = np.linalg.svd(reach, full_matrices=False)
        keep = min(dim, len(s))
        components = _fix_signs(u[:, :keep] * s[:keep])
        if keep < dim:
            components = np.pad(components, ((0, 0), (0, dim - keep)))
        for row, node_idx in enumerate(connected):
            vectors[graph.nodes[node_idx]] = components[row]

    metadata = {
        "model": "graphvec",
        "dim": dim,
        "decay": decay,
        "hops": hops,
        "nodes": len(graph),
        "edges": len(graph.edges),
        "singletons": sorted(singletons),
    }
    return VectorTable(dim=dim, vectors=vectors, metadata=metadata)
