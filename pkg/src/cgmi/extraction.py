"""Noun-adjective pair extraction from parsed treebanks.

Pairs are adjectives attached to a noun head through the ``amod`` relation.
Nouns are kept only when their lemma appears in an inanimate-noun lexicon,
and each noun type receives a single gender label by majority vote over the
``Gender`` morphological feature observed across the corpus.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field

# UD feature values mapped onto inventory labels.
UD_GENDER_LABELS = {"Masc": "MSC", "Fem": "FEM", "Neut": "NEU"}

# Languages covered by the stock inventories below.
STOCK_INVENTORIES = {
    "de": ("FEM", "MSC", "NEU"),
    "es": ("FEM", "MSC"),
    "he": ("FEM", "MSC"),
    "pl": ("FEM", "MSC", "NEU"),
    "pt": ("FEM", "MSC"),
}


def normalize_lemma(lemma):
    """Canonical lemma form: NFC-normalized and lowercased."""
    return unicodedata.normalize("NFC", lemma).lower()


@dataclass(frozen=True)
class GenderInventory:
    language: str
    labels: tuple

    def __post_init__(self):
        if not self.labels:
            raise ValueError("gender inventory must be non-empty")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("gender labels must be unique")
        if self.language in STOCK_INVENTORIES and len(self.labels) not in (2, 3):
            raise ValueError(
                f"{self.language} expects 2 or 3 genders, got {len(self.labels)}"
            )

    @classmethod
    def for_language(cls, language):
        try:
            return cls(language, STOCK_INVENTORIES[language])
        except KeyError:
            raise ValueError(
                f"no stock gender inventory for {language!r}; "
                f"known: {sorted(STOCK_INVENTORIES)}"
            ) from None

    def rank(self, label):
        """Position of a label in inventory order; unknown labels sort last."""
        try:
            return self.labels.index(label)
        except ValueError:
            return len(self.labels)


@dataclass(frozen=True)
class InanimateLexicon:
    lemmas: frozenset

    def __post_init__(self):
        if not self.lemmas:
            raise ValueError("inanimate lexicon must be non-empty")

    def __contains__(self, lemma):
        return lemma in self.lemmas

    @classmethod
    def from_lemmas(cls, lemmas):
        return cls(frozenset(normalize_lemma(l) for l in lemmas))

    @classmethod
    def from_file(cls, path):
        """Load a one-lemma-per-line UTF-8 file; ``#`` starts a comment."""
        lemmas = set()
        with open(path, encoding="utf-8") as stream:
            for line in stream:
                entry = line.split("#", 1)[0].strip()
                if entry:
                    lemmas.add(normalize_lemma(entry))
        return cls(frozenset(lemmas))


@dataclass
class PairCorpus:
    """Counts of (noun lemma, adjective lemma) pairs plus noun genders."""

    entries: dict          # (noun, adjective) -> count >= 1
    noun_gender: dict      # noun -> gender label

    def __post_init__(self):
        for (noun, adjective), count in self.entries.items():
            if count < 1:
                raise ValueError(f"count for ({noun}, {adjective}) must be >= 1")
            if noun not in self.noun_gender:
                raise ValueError(f"noun {noun!r} has no gender label")

    def nouns(self):
        return sorted({noun for noun, _ in self.entries})

    def adjectives(self):
        return sorted({adjective for _, adjective in self.entries})

    def token_count(self):
        return sum(self.entries.values())

    def adjective_frequencies(self):
        freqs = Counter()
        for (_, adjective), count in self.entries.items():
            freqs[adjective] += count
        return freqs

    def noun_frequencies(self):
        freqs = Counter()
        for (noun, _), count in self.entries.items():
            freqs[noun] += count
        return freqs

    def merge(self, other):
        """Combine two pair corpora by count addition (shard merge)."""
        entries = dict(self.entries)
        for key, count in other.entries.items():
            entries[key] = entries.get(key, 0) + count
        noun_gender = dict(self.noun_gender)
        for noun, gender in other.noun_gender.items():
            if noun_gender.get(noun, gender) != gender:
                raise ValueError(f"conflicting gender for noun {noun!r}")
            noun_gender[noun] = gender
        return PairCorpus(entries=entries, noun_gender=noun_gender)


@dataclass
class ExtractionTally:
    """Reasons for dropping candidate pairs, in pair tokens."""

    kept: int = 0
    not_inanimate: int = 0
    no_gender: int = 0
    gender_outside_inventory: int = 0

    def as_dict(self):
        return {
            "kept": self.kept,
            "not_inanimate": self.not_inanimate,
            "no_gender": self.no_gender,
            "gender_outside_inventory": self.gender_outside_inventory,
        }


class PairAccumulator:
    """Streaming accumulator for pair extraction.

    Accumulators built from disjoint sentence shards can be merged; the
    result does not depend on shard boundaries or merge order, because
    gender votes are resolved only at finalize time.
    """

    def __init__(self, lexicon, inventory):
        self.lexicon = lexicon
        self.inventory = inventory
        self.pair_counts = Counter()
        self.gender_votes = {}
        self.not_inanimate = 0

    def add_sentence(self, sentence):
        for token in sentence.tokens:
            if token.upos == "NOUN":
                value = token.feats.get("Gender")
                if value is not None:
                    lemma = normalize_lemma(token.lemma)
                    label = UD_GENDER_LABELS.get(value, value)
                    votes = self.gender_votes.setdefault(lemma, Counter())
                    votes[label] += 1
            if token.upos != "ADJ" or token.deprel != "amod":
                continue
            if not 1 <= token.head <= len(sentence.tokens):
                continue
            head = sentence.token_by_index(token.head)
            if head.upos != "NOUN":
                continue
            noun = normalize_lemma(head.lemma)
            adjective = normalize_lemma(token.lemma)
            if noun not in self.lexicon:
                self.not_inanimate += 1
                continue
            self.pair_counts[(noun, adjective)] += 1

    def add_sentences(self, sentences):
        for sentence in sentences:
            self.add_sentence(sentence)
        return self

    def merge(self, other):
        self.pair_counts.update(other.pair_counts)
        for lemma, votes in other.gender_votes.items():
            self.gender_votes.setdefault(lemma, Counter()).update(votes)
        self.not_inanimate += other.not_inanimate
        return self

    def _resolve_gender(self, lemma):
        votes = self.gender_votes.get(lemma)
        if not votes:
            return None
        # Majority vote; ties break by inventory label order.
        best = min(votes, key=lambda lab: (-votes[lab], self.inventory.rank(lab), lab))
        return best

    def finalize(self, tally=None):
        if tally is None:
            tally = ExtractionTally()
        tally.not_inanimate += self.not_inanimate
        entries = {}
        noun_gender = {}
        for (noun, adjective), count in self.pair_counts.items():
            if noun not in noun_gender:
                label = self._resolve_gender(noun)
                if label is None:
                    tally.no_gender += count
                    continue
                if label not in self.inventory.labels:
                    tally.gender_outside_inventory += count
                    continue
                noun_gender[noun] = label
            entries[(noun, adjective)] = count
            tally.kept += count
        return PairCorpus(entries=entries, noun_gender=noun_gender)


def extract_pairs(sentences, lexicon, inventory, tally=None):
    """Extract an inanimate noun-adjective PairCorpus from parsed sentences."""
    accumulator = PairAccumulator(lexicon, inventory)
    accumulator.add_sentences(sentences)
    return accumulator.finalize(tally)


def strip_adjectives(sentences):
    """Yield per-sentence lemma lists with every ADJ token removed."""
    for sentence in sentences:
        yield [
            normalize_lemma(token.lemma)
            for token in sentence.tokens
            if token.upos != "ADJ"
        ]


def sentence_lemmas(sentences):
    """Yield per-sentence lemma lists with all tokens retained."""
    for sentence in sentences:
        yield [normalize_lemma(token.lemma) for token in sentence.tokens]


@dataclass(frozen=True)
class CorpusStats:
    noun_types: int
    adjective_types: int
    pair_types: int
    pair_tokens: int

    def as_dict(self):
        return {
            "noun_types": self.noun_types,
            "adjective_types": self.adjective_types,
            "pair_types": self.pair_types,
            "pair_tokens": self.pair_tokens,
        }


def corpus_stats(pair_corpus):
    """Type and token counts of a PairCorpus."""
    nouns = set()
    adjectives = set()
    tokens = 0
    for (noun, adjective), count in pair_corpus.entries.items():
        nouns.add(noun)
        adjectives.add(adjective)
        tokens += count
    return CorpusStats(
        noun_types=len(nouns),
        adjective_types=len(adjectives),
        pair_types=len(pair_corpus.entries),
        pair_tokens=tokens,
    )


def write_pairs_tsv(pair_corpus, stream):
    """Write ``noun<TAB>gender<TAB>adjective<TAB>count`` rows, sorted."""
    for (noun, adjective) in sorted(pair_corpus.entries):
        count = pair_corpus.entries[(noun, adjective)]
        gender = pair_corpus.noun_gender[noun]
        stream.write(f"{noun}\t{gender}\t{adjective}\t{count}\n")


def read_pairs_tsv(stream):
    """Read a PairCorpus written by write_pairs_tsv."""
    entries = {}
    noun_gender = {}
    for line_number, line in enumerate(stream, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ValueError(f"pairs TSV line {line_number}: expected 4 columns")
        noun, gender, adjective, count = parts
        entries[(noun, adjective)] = entries.get((noun, adjective), 0) + int(count)
        if noun_gender.get(noun, gender) != gender:
            raise ValueError(f"pairs TSV line {line_number}: conflicting gender for {noun!r}")
        noun_gender[noun] = gender
    return PairCorpus(entries=entries, noun_gender=noun_gender)


def write_lemma_stream(sentences, stream):
    """Write one space-separated sentence of lemmas per line."""
    for lemmas in sentences:
        stream.write(" ".join(lemmas))
        stream.write("\n")


def read_lemma_stream(stream):
    """Read a lemma stream back into per-sentence token lists."""
    sentences = []
    for line in stream:
        line = line.rstrip("\n")
        sentences.append(line.split(" ") if line else [])
    return sentences
