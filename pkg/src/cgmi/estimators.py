"""Mutual-information estimators over adjective and gender distributions.

Three routes to "how much does gender tell us about adjective choice":

* plug-in: mutual information of the empirical adjective/gender joint,
* model-based: the same functional applied to a joint reconstructed from a
  fitted classifier,
* interventional: mutual information between an assigned gender and the
  adjective distribution it induces when everything else is held fixed.

All quantities are in bits.  Long sums use math.fsum, which is exactly
rounded and therefore independent of summation order, so repeated runs of
the same estimate are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import CategoricalDistribution, _score_chunk, log_softmax

JOINT_ATOL = 1e-9


def entropy(dist) -> float:
    """Shannon entropy in bits; zero-probability outcomes contribute 0."""
    probs = np.asarray(getattr(dist, "probs", dist), dtype=np.float64)
    if probs.size == 0:
        raise ValueError("entropy of an empty distribution is undefined")
    if np.any(probs < 0):
        raise ValueError("probabilities must be non-negative")
    terms = [p * math.log2(p) for p in probs.tolist() if p > 0.0]
    return -math.fsum(terms)


def kl_divergence(p, q) -> float:
    """KL(p || q) in bits.  Distributions must share an identical support.

    Raises if q assigns zero probability where p does not (the divergence
    is undefined there; mixtures containing p with positive weight always
    dominate p, so the JS computation below never hits this).
    """
    if isinstance(p, CategoricalDistribution) and isinstance(q, CategoricalDistribution):
        if p.support != q.support:
            raise ValueError("KL divergence requires identical supports")
        p_arr, q_arr = p.probs, q.probs
    else:
        p_arr = np.asarray(getattr(p, "probs", p), dtype=np.float64)
        q_arr = np.asarray(getattr(q, "probs", q), dtype=np.float64)
        if p_arr.shape != q_arr.shape:
            raise ValueError("KL divergence requires equal-length distributions")
    terms = []
    for pi, qi in zip(p_arr.tolist(), q_arr.tolist()):
        if pi <= 0.0:
            continue
        if qi <= 0.0:
            raise ValueError("KL divergence undefined: q is zero where p is positive")
        terms.append(pi * math.log2(pi / qi))
    return math.fsum(terms)


def mixture(dists, weights):
    """Weighted mixture of distributions sharing a support."""
    dists = list(dists)
    if not dists:
        raise ValueError("mixture of zero distributions is undefined")
    weights = np.asarray(getattr(weights, "probs", weights), dtype=np.float64)
    if weights.shape != (len(dists),):
        raise ValueError("one weight per distribution required")
    if np.any(weights < 0) or abs(float(weights.sum()) - 1.0) > 1e-12:
        raise ValueError("weights must be non-negative and sum to 1")
    support = dists[0].support
    for d in dists[1:]:
        if d.support != support:
            raise ValueError("mixture components must share a support")
    stacked = np.stack([d.probs for d in dists])   # (K, A)
    probs = np.array(
        [math.fsum((weights * stacked[:, a]).tolist()) for a in range(stacked.shape[1])]
    )
    return CategoricalDistribution(support=support, probs=probs / math.fsum(probs.tolist()))


def weighted_js_divergence(dists, weights) -> float:
    """Weighted Jensen-Shannon divergence in bits.

    JS_pi(p_1..p_K) = sum_k pi_k KL(p_k || m) with m the pi-mixture.  Zero
    when all components are identical; at most the entropy of pi.
    """
    dists = list(dists)
    weights = np.asarray(getattr(weights, "probs", weights), dtype=np.float64)
    m = mixture(dists, weights)
    terms = [
        float(w) * kl_divergence(d, m) for d, w in zip(dists, weights.tolist()) if w > 0.0
    ]
    return math.fsum(terms)


@dataclass(eq=False)
class AdjectiveGenderJoint:
    """A joint distribution over (adjective, gender) pairs."""

    adjectives: tuple
    genders: tuple
    matrix: np.ndarray     # (n_adjectives, n_genders), sums to 1

    def __post_init__(self):
        self.adjectives = tuple(self.adjectives)
        self.genders = tuple(self.genders)
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.shape != (len(self.adjectives), len(self.genders)):
            raise ValueError(
                f"joint matrix shape {self.matrix.shape} does not match "
                f"{len(self.adjectives)} adjectives x {len(self.genders)} genders"
            )
        if len(set(self.adjectives)) != len(self.adjectives):
            raise ValueError("adjective labels must be unique")
        if len(set(self.genders)) != len(self.genders):
            raise ValueError("gender labels must be unique")
        if np.any(self.matrix < 0):
            raise ValueError("joint probabilities must be non-negative")
        total = math.fsum(self.matrix.ravel().tolist())
        if abs(total - 1.0) > JOINT_ATOL:
            raise ValueError(f"joint sums to {total!r}, not 1")

    @classmethod
    def from_counts(cls, adjectives, genders, counts):
        counts = np.asarray(counts, dtype=np.float64)
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        total = math.fsum(counts.ravel().tolist())
        if total <= 0:
            raise ValueError("counts are all zero")
        return cls(adjectives=adjectives, genders=genders, matrix=counts / total)

    def adjective_marginal(self):
        probs = np.array([math.fsum(row.tolist()) for row in self.matrix])
        return CategoricalDistribution(support=self.adjectives, probs=probs)

    def gender_marginal(self):
        probs = np.array([math.fsum(col.tolist()) for col in self.matrix.T])
        return CategoricalDistribution(support=self.genders, probs=probs)

    def conditional_given_gender(self, gender):
        gi = self.genders.index(gender)
        column = self.matrix[:, gi]
        total = math.fsum(column.tolist())
        if total <= 0:
            raise ValueError(f"gender {gender!r} has zero marginal probability")
        return CategoricalDistribution(support=self.adjectives, probs=column / total)


def joint_from_pairs(pair_corpus):
    """Empirical (adjective, gender) joint from noun-adjective pair counts."""
    adjectives = tuple(pair_corpus.adjectives())
    genders = tuple(sorted(set(pair_corpus.noun_gender.values())))
    a_index = {a: i for i, a in enumerate(adjectives)}
    g_index = {g: i for i, g in enumerate(genders)}
    counts = np.zeros((len(adjectives), len(genders)))
    for (noun, adjective), count in pair_corpus.entries.items():
        counts[a_index[adjective], g_index[pair_corpus.noun_gender[noun]]] += count
    return AdjectiveGenderJoint.from_counts(adjectives, genders, counts)


def joint_from_dataset(dataset, vocab, genders=None):
    """Empirical joint from dataset entries indexed against a vocab."""
    if genders is None:
        genders = tuple(sorted({noun.gender for noun in dataset.nouns()}))
    g_index = {g: i for i, g in enumerate(genders)}
    counts = np.zeros((len(vocab), len(genders)))
    for noun, entry_counts in dataset.entries:
        gi = g_index[noun.gender]
        for index, count in entry_counts.items():
            counts[index, gi] += count
    return AdjectiveGenderJoint.from_counts(tuple(vocab.lemmas), genders, counts)


def mutual_information(joint: AdjectiveGenderJoint) -> float:
    """Mutual information of a joint distribution, in bits."""
    adj_marg = [math.fsum(row.tolist()) for row in joint.matrix]
    gen_marg = [math.fsum(col.tolist()) for col in joint.matrix.T]
    terms = []
    for i, row in enumerate(joint.matrix):
        for j, value in enumerate(row.tolist()):
            if value > 0.0:
                terms.append(value * math.log2(value / (adj_marg[i] * gen_marg[j])))
    return math.fsum(terms)


def plugin_mi(pair_corpus) -> float:
    """Plug-in mutual information of the empirical adjective/gender joint."""
    return mutual_information(joint_from_pairs(pair_corpus))


def _context_meanings(contexts):
    meanings = []
    weights = []
    for context in contexts:
        meaning = getattr(context, "meaning", context)
        meanings.append(np.asarray(meaning, dtype=np.float64))
        weights.append(float(getattr(context, "weight", 1.0)))
    if not meanings:
        raise ValueError("at least one context is required")
    return np.stack(meanings), np.array(weights)


def _gender_context_triples(contexts):
    """Normalize gender-noun contexts to (gender, meaning, weight) triples.

    Accepts NounEntry objects, (gender, meaning) pairs, or (gender,
    meaning, weight) triples.
    """
    triples = []
    for context in contexts:
        if hasattr(context, "meaning") and hasattr(context, "gender"):
            triples.append(
                (
                    context.gender,
                    np.asarray(context.meaning, dtype=np.float64),
                    float(getattr(context, "weight", 1.0)),
                )
            )
        else:
            gender, meaning, *rest = context
            weight = float(rest[0]) if rest else 1.0
            triples.append((gender, np.asarray(meaning, dtype=np.float64), weight))
    if not triples:
        raise ValueError("at least one gender-noun context is required")
    return triples


def model_joint(params, vocab, contexts, weights=None):
    """Adjective/gender joint reconstructed from the classifier.

    p(a, g) = sum over contexts (h, m) of omega * p(a | h, m) * 1{g = h},
    with omega uniform over contexts by default, "tokens" for the contexts'
    own weights, or an explicit array.
    """
    triples = _gender_context_triples(contexts)
    meanings = np.stack([m for _, m, _ in triples])
    token_weights = np.array([w for _, _, w in triples])
    omega = _resolve_weights(meanings, weights, token_weights)
    gender_idx = np.array([params.gender_index(g) for g, _, _ in triples])
    matrix = np.zeros((len(vocab), len(params.genders)))
    for start in range(0, meanings.shape[0], 256):
        chunk = slice(start, min(start + 256, meanings.shape[0]))
        scores = _score_chunk(params, vocab, meanings[chunk], gender_idx[chunk])
        probs = np.exp(log_softmax(scores))
        for row, gi in enumerate(gender_idx[chunk]):
            matrix[:, gi] += omega[chunk][row] * probs[row]
    return AdjectiveGenderJoint(
        adjectives=tuple(vocab.lemmas),
        genders=tuple(params.genders),
        matrix=matrix / matrix.sum(),
    )


def model_mi(params, vocab, contexts, weights=None) -> float:
    """Mutual information of the classifier-reconstructed joint, in bits."""
    return mutual_information(model_joint(params, vocab, contexts, weights=weights))


def _resolve_weights(contexts, weights, token_weights):
    if weights is None:
        return np.full(len(contexts), 1.0 / len(contexts))
    if isinstance(weights, str):
        if weights != "tokens":
            raise ValueError("weights must be None, 'tokens', or an array")
        return token_weights / token_weights.sum()
    weights = np.asarray(getattr(weights, "probs", weights), dtype=np.float64)
    if weights.shape != (len(contexts),):
        raise ValueError("one weight per context required")
    if np.any(weights < 0) or weights.sum() <= 0:
        raise ValueError("context weights must be non-negative with positive total")
    return weights / weights.sum()


def _conditional_probs(params, vocab, meanings):
    """p(adjective | gender, meaning) for every meaning and gender.

    Returns an array of shape (n_genders, n_contexts, n_adjectives).
    """
    out = np.empty((len(params.genders), meanings.shape[0], len(vocab)))
    for gi in range(len(params.genders)):
        idx = np.full(meanings.shape[0], gi)
        for start in range(0, meanings.shape[0], 256):
            chunk = slice(start, min(start + 256, meanings.shape[0]))
            scores = _score_chunk(params, vocab, meanings[chunk], idx[chunk])
            out[gi, chunk] = np.exp(log_softmax(scores))
    return out


def intervention_distribution(params, vocab, contexts, gender, weights=None):
    """Adjective distribution under an assigned gender.

    Averages the classifier's conditional p(adjective | gender, meaning)
    over the context meanings with the given weights (uniform by default,
    "tokens" for token-weighted, or an explicit array).
    """
    meanings, token_weights = _context_meanings(contexts)
    omega = _resolve_weights(meanings, weights, token_weights)
    gi = params.gender_index(gender)
    idx = np.full(meanings.shape[0], gi)
    probs = np.zeros(len(vocab))
    for start in range(0, meanings.shape[0], 256):
        chunk = slice(start, min(start + 256, meanings.shape[0]))
        scores = _score_chunk(params, vocab, meanings[chunk], idx[chunk])
        probs += omega[chunk] @ np.exp(log_softmax(scores))
    return CategoricalDistribution(support=vocab.lemmas, probs=probs / probs.sum())


@dataclass(eq=False)
class InterventionFamily:
    """Per-gender intervention distributions plus the gender weighting."""

    distributions: dict                       # gender -> CategoricalDistribution
    gender_weights: CategoricalDistribution   # over the same genders

    def __post_init__(self):
        if set(self.distributions) != set(self.gender_weights.support):
            raise ValueError("distributions and weights must cover the same genders")
        supports = {d.support for d in self.distributions.values()}
        if len(supports) != 1:
            raise ValueError("intervention distributions must share a support")

    @property
    def genders(self):
        return self.gender_weights.support

    def ordered(self):
        return [self.distributions[g] for g in self.genders]


def intervention_family(params, vocab, contexts, gender_weights, weights=None):
    """Intervention distributions for every gender the classifier knows."""
    if tuple(gender_weights.support) != tuple(params.genders):
        raise ValueError(
            f"gender weights over {gender_weights.support} do not match "
            f"classifier genders {params.genders}"
        )
    distributions = {
        g: intervention_distribution(params, vocab, contexts, g, weights=weights)
        for g in params.genders
    }
    return InterventionFamily(distributions=distributions, gender_weights=gender_weights)


def family_js(family: InterventionFamily) -> float:
    """Weighted JS divergence of an intervention family (KL route)."""
    return weighted_js_divergence(family.ordered(), family.gender_weights.probs)


def entropy_difference_mi(family: InterventionFamily) -> float:
    """Interventional MI as mixture entropy minus mean component entropy.

    Computed through entropies only, so it is an independent route to the
    same quantity as family_js; the two agree up to float rounding.
    """
    dists = family.ordered()
    pi = family.gender_weights.probs
    mix = mixture(dists, pi)
    conditional = math.fsum(
        float(w) * entropy(d) for d, w in zip(dists, pi.tolist()) if w > 0.0
    )
    return entropy(mix) - conditional


def mi_do(params, vocab, nouns, gender_weights, weights=None) -> float:
    """Interventional mutual information between gender and adjective, bits.

    Builds the per-gender intervention distributions over the given noun
    contexts and returns their weighted Jensen-Shannon divergence under the
    gender marginal, which equals H_do(A) - H_do(A|G).
    """
    family = intervention_family(params, vocab, nouns, gender_weights, weights=weights)
    return family_js(family)
