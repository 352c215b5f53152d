"""Tests for entropy, divergence, and mutual-information estimators.

Fuzz tests compare the fsum-based implementations against naive nested-loop
oracles written independently here, so agreement is evidence rather than
tautology.
"""

import math

import numpy as np
import pytest

from cgmi.estimators import (
    AdjectiveGenderJoint,
    InterventionFamily,
    entropy,
    entropy_difference_mi,
    family_js,
    intervention_distribution,
    intervention_family,
    joint_from_pairs,
    kl_divergence,
    mi_do,
    mixture,
    model_joint,
    model_mi,
    mutual_information,
    plugin_mi,
    weighted_js_divergence,
)
from cgmi.extraction import PairCorpus
from cgmi.model import (
    AdjectiveVocab,
    CategoricalDistribution,
    NounEntry,
    ablate_gender,
    init_params,
    predict_adjective_distribution,
)


def dist(probs, support=None):
    probs = np.asarray(probs, dtype=np.float64)
    if support is None:
        support = tuple(f"a{i}" for i in range(len(probs)))
    return CategoricalDistribution(support=support, probs=probs)


def naive_entropy_bits(probs):
    return -sum(p * math.log2(p) for p in probs if p > 0)


def naive_kl_bits(p, q):
    return sum(pi * math.log2(pi / qi) for pi, qi in zip(p, q) if pi > 0)


def naive_mi_bits(matrix):
    matrix = np.asarray(matrix, dtype=np.float64)
    row = matrix.sum(axis=1)
    col = matrix.sum(axis=0)
    total = 0.0
    for i in range(matrix.shape[0]):
        for j in range(matrix.shape[1]):
            value = matrix[i, j]
            if value > 0:
                total += value * math.log2(value / (row[i] * col[j]))
    return total


def small_world(n_adjectives=4, d_adj=3, d_noun=2, hidden=3, seed=0,
                genders=("FEM", "MSC")):
    """A random classifier plus matching vocab for estimator tests."""
    rng = np.random.default_rng(seed)
    vocab = AdjectiveVocab(
        lemmas=tuple(f"adj{i}" for i in range(n_adjectives)),
        matrix=rng.normal(size=(n_adjectives, d_adj)),
        frequencies=tuple(range(n_adjectives, 0, -1)),
    )
    params = init_params(vocab, d_noun=d_noun, genders=genders,
                         hidden=hidden, seed=seed)
    # Symmetric inits give degenerate uniform outputs; perturb.
    params.W += 0.5 * rng.normal(size=params.W.shape)
    params.w += 0.5 * rng.normal(size=params.w.shape)
    return params, vocab


# ---------------------------------------------------------------------
# entropy
# ---------------------------------------------------------------------


def test_entropy_point_mass_is_zero():
    assert entropy(dist([1.0, 0.0, 0.0])) == 0.0


def test_entropy_uniform_four_is_two_bits():
    # Powers of two make the log2 terms exact in float64.
    assert entropy(dist([0.25, 0.25, 0.25, 0.25])) == 2.0


def test_entropy_dyadic_mix_is_exact():
    assert entropy(dist([0.5, 0.25, 0.25])) == 1.5


def test_entropy_accepts_plain_arrays():
    assert entropy(np.array([0.5, 0.5])) == 1.0


def test_entropy_matches_naive_oracle():
    rng = np.random.default_rng(7)
    for _ in range(50):
        probs = rng.dirichlet(np.ones(rng.integers(2, 12)))
        np.testing.assert_allclose(
            entropy(dist(probs)), naive_entropy_bits(probs), atol=1e-12
        )


def test_entropy_rejects_empty_and_negative():
    with pytest.raises(ValueError, match="empty"):
        entropy(np.array([]))
    with pytest.raises(ValueError, match="non-negative"):
        entropy(np.array([1.5, -0.5]))


# ---------------------------------------------------------------------
# KL divergence
# ---------------------------------------------------------------------


def test_kl_of_identical_distributions_is_zero():
    p = dist([0.2, 0.3, 0.5])
    assert kl_divergence(p, p) == 0.0


def test_kl_point_mass_versus_fair_coin_is_one_bit():
    p = dist([1.0, 0.0])
    q = dist([0.5, 0.5])
    assert kl_divergence(p, q) == 1.0


def test_kl_matches_naive_oracle():
    rng = np.random.default_rng(11)
    for _ in range(50):
        k = int(rng.integers(2, 10))
        p = rng.dirichlet(np.ones(k))
        q = rng.dirichlet(np.ones(k))
        np.testing.assert_allclose(
            kl_divergence(dist(p), dist(q)), naive_kl_bits(p, q), atol=1e-12
        )


def test_kl_is_nonnegative():
    rng = np.random.default_rng(13)
    for _ in range(100):
        k = int(rng.integers(2, 8))
        p = rng.dirichlet(np.ones(k))
        q = rng.dirichlet(np.ones(k))
        assert kl_divergence(dist(p), dist(q)) >= 0.0


def test_kl_undefined_when_q_vanishes_on_support_of_p():
    with pytest.raises(ValueError, match="undefined"):
        kl_divergence(dist([0.5, 0.5]), dist([1.0, 0.0]))


def test_kl_requires_identical_supports():
    p = dist([0.5, 0.5], support=("x", "y"))
    q = dist([0.5, 0.5], support=("y", "x"))
    with pytest.raises(ValueError, match="support"):
        kl_divergence(p, q)


# ---------------------------------------------------------------------
# mixtures and weighted JS divergence
# ---------------------------------------------------------------------


def test_mixture_averages_probabilities():
    m = mixture([dist([1.0, 0.0]), dist([0.0, 1.0])], [0.25, 0.75])
    np.testing.assert_allclose(m.probs, [0.25, 0.75], atol=1e-15)


def test_mixture_validates_weights_and_supports():
    p = dist([0.5, 0.5])
    with pytest.raises(ValueError, match="sum to 1"):
        mixture([p, p], [0.5, 0.6])
    with pytest.raises(ValueError, match="support"):
        mixture([p, dist([0.5, 0.5], support=("u", "v"))], [0.5, 0.5])


def test_js_of_identical_components_is_zero():
    p = dist([0.1, 0.6, 0.3])
    assert weighted_js_divergence([p, p, p], [0.2, 0.3, 0.5]) == 0.0


def test_js_of_disjoint_halves_is_one_bit():
    """Two point masses on different outcomes, equal weights: exactly 1 bit."""
    p = dist([1.0, 0.0])
    q = dist([0.0, 1.0])
    assert weighted_js_divergence([p, q], [0.5, 0.5]) == 1.0


def test_js_equals_entropy_difference_identity():
    """JS_pi == H(mixture) - sum_k pi_k H(p_k), checked by both routes."""
    rng = np.random.default_rng(17)
    for _ in range(100):
        k = int(rng.integers(2, 6))
        n = int(rng.integers(2, 9))
        dists = [dist(rng.dirichlet(np.ones(n))) for _ in range(k)]
        pi = rng.dirichlet(np.ones(k))
        js = weighted_js_divergence(dists, pi)
        mix_entropy = entropy(mixture(dists, pi))
        mean_entropy = sum(w * entropy(d) for d, w in zip(dists, pi))
        np.testing.assert_allclose(js, mix_entropy - mean_entropy, atol=1e-12)


def test_js_bounded_by_weight_entropy():
    rng = np.random.default_rng(19)
    for _ in range(100):
        k = int(rng.integers(2, 6))
        dists = [dist(rng.dirichlet(np.ones(5))) for _ in range(k)]
        pi = rng.dirichlet(np.ones(k))
        js = weighted_js_divergence(dists, pi)
        assert -1e-12 <= js <= naive_entropy_bits(pi) + 1e-12
        assert js <= math.log2(k) + 1e-12


# ---------------------------------------------------------------------
# joint distributions and mutual information
# ---------------------------------------------------------------------


def test_joint_from_counts_normalizes():
    joint = AdjectiveGenderJoint.from_counts(
        ("a", "b"), ("FEM", "MSC"), [[2, 0], [0, 2]]
    )
    np.testing.assert_allclose(joint.matrix, [[0.5, 0.0], [0.0, 0.5]])


def test_joint_validation():
    with pytest.raises(ValueError, match="shape"):
        AdjectiveGenderJoint(("a",), ("FEM", "MSC"), np.ones((2, 2)) / 4)
    with pytest.raises(ValueError, match="not 1"):
        AdjectiveGenderJoint(("a", "b"), ("FEM", "MSC"), np.ones((2, 2)))
    with pytest.raises(ValueError, match="all zero"):
        AdjectiveGenderJoint.from_counts(("a",), ("FEM",), [[0]])


def test_joint_marginals_and_conditionals():
    joint = AdjectiveGenderJoint(
        ("a", "b"), ("FEM", "MSC"), np.array([[0.4, 0.1], [0.2, 0.3]])
    )
    np.testing.assert_allclose(joint.adjective_marginal().probs, [0.5, 0.5])
    np.testing.assert_allclose(joint.gender_marginal().probs, [0.6, 0.4])
    np.testing.assert_allclose(
        joint.conditional_given_gender("FEM").probs, [2 / 3, 1 / 3]
    )


def test_conditional_on_zero_marginal_raises():
    joint = AdjectiveGenderJoint(
        ("a", "b"), ("FEM", "MSC"), np.array([[0.5, 0.0], [0.5, 0.0]])
    )
    with pytest.raises(ValueError, match="zero marginal"):
        joint.conditional_given_gender("MSC")


def test_mi_of_product_joint_is_zero():
    """Rank-one count tables have exactly independent margins."""
    rng = np.random.default_rng(23)
    for _ in range(50):
        row = rng.integers(1, 10, size=int(rng.integers(2, 8)))
        col = rng.integers(1, 10, size=int(rng.integers(2, 5)))
        joint = AdjectiveGenderJoint.from_counts(
            tuple(f"a{i}" for i in range(len(row))),
            tuple(f"g{j}" for j in range(len(col))),
            np.outer(row, col),
        )
        assert abs(mutual_information(joint)) < 1e-12


def test_mi_of_perfectly_correlated_pair_is_one_bit():
    joint = AdjectiveGenderJoint.from_counts(
        ("a", "b"), ("FEM", "MSC"), [[1, 0], [0, 1]]
    )
    assert mutual_information(joint) == 1.0


def test_mi_matches_nested_sum_oracle():
    rng = np.random.default_rng(29)
    for _ in range(100):
        counts = rng.integers(0, 50, size=(10, 3))
        counts[0, 0] += 1
        joint = AdjectiveGenderJoint.from_counts(
            tuple(f"a{i}" for i in range(10)),
            ("g0", "g1", "g2"),
            counts,
        )
        np.testing.assert_allclose(
            mutual_information(joint), naive_mi_bits(joint.matrix), atol=1e-12
        )


def test_mi_bounded_by_marginal_entropies():
    rng = np.random.default_rng(31)
    for _ in range(100):
        counts = rng.integers(0, 20, size=(6, 3))
        counts[0, 0] += 1
        joint = AdjectiveGenderJoint.from_counts(
            tuple(f"a{i}" for i in range(6)), ("x", "y", "z"), counts
        )
        mi = mutual_information(joint)
        bound = min(entropy(joint.adjective_marginal()),
                    entropy(joint.gender_marginal()))
        assert -1e-12 <= mi <= bound + 1e-12


def test_mi_invariant_under_relabeling():
    """Permuting rows and columns of the joint leaves MI unchanged."""
    rng = np.random.default_rng(37)
    counts = rng.integers(1, 30, size=(5, 3))
    base = AdjectiveGenderJoint.from_counts(
        tuple("abcde"), ("x", "y", "z"), counts
    )
    rows = rng.permutation(5)
    cols = rng.permutation(3)
    shuffled = AdjectiveGenderJoint.from_counts(
        tuple(np.array(list("abcde"))[rows]),
        tuple(np.array(["x", "y", "z"])[cols]),
        counts[np.ix_(rows, cols)],
    )
    np.testing.assert_allclose(
        mutual_information(base), mutual_information(shuffled), atol=1e-14
    )


def test_joint_from_pairs_aggregates_by_gender():
    corpus = PairCorpus(
        entries={("dom", "nowy"): 3, ("noc", "nowy"): 1, ("noc", "ciemna"): 2},
        noun_gender={"dom": "MSC", "noc": "FEM"},
    )
    joint = joint_from_pairs(corpus)
    assert joint.adjectives == ("ciemna", "nowy")
    assert joint.genders == ("FEM", "MSC")
    np.testing.assert_allclose(
        joint.matrix, np.array([[2, 0], [1, 3]]) / 6.0
    )
    np.testing.assert_allclose(plugin_mi(corpus), naive_mi_bits(joint.matrix))


# ---------------------------------------------------------------------
# model-based joints
# ---------------------------------------------------------------------


def test_model_joint_single_context_occupies_one_column():
    params, vocab = small_world()
    meaning = np.array([0.3, -0.2])
    joint = model_joint(params, vocab, [("FEM", meaning)])
    gi = params.gender_index("FEM")
    assert np.all(joint.matrix[:, 1 - gi] == 0.0)
    predicted = predict_adjective_distribution(params, vocab, meaning, "FEM")
    np.testing.assert_allclose(joint.matrix[:, gi], predicted.probs, atol=1e-12)


def test_model_joint_total_mass_is_one():
    params, vocab = small_world(seed=3)
    rng = np.random.default_rng(3)
    contexts = [
        ("FEM" if rng.random() < 0.5 else "MSC", rng.normal(size=2))
        for _ in range(9)
    ]
    joint = model_joint(params, vocab, contexts)
    np.testing.assert_allclose(joint.matrix.sum(), 1.0, atol=1e-12)


def test_model_joint_matches_hand_expansion():
    """Two uniform-weight contexts: p(a, g) = mean of indicator-weighted rows."""
    params, vocab = small_world(seed=5)
    m1, m2 = np.array([0.4, 0.1]), np.array([-0.3, 0.8])
    joint = model_joint(params, vocab, [("FEM", m1), ("MSC", m2)])

    p1 = predict_adjective_distribution(params, vocab, m1, "FEM").probs
    p2 = predict_adjective_distribution(params, vocab, m2, "MSC").probs
    expected = np.zeros((len(vocab), 2))
    expected[:, params.gender_index("FEM")] += 0.5 * p1
    expected[:, params.gender_index("MSC")] += 0.5 * p2
    np.testing.assert_allclose(joint.matrix, expected, atol=1e-12)


def test_model_joint_token_weighting_uses_context_weights():
    params, vocab = small_world(seed=6)
    nouns = [
        NounEntry("n1", "FEM", np.array([0.2, 0.2]), weight=3),
        NounEntry("n2", "MSC", np.array([-0.5, 0.1]), weight=1),
    ]
    joint = model_joint(params, vocab, nouns, weights="tokens")
    p1 = predict_adjective_distribution(params, vocab, nouns[0].meaning, "FEM").probs
    expected_fem = 0.75 * p1
    np.testing.assert_allclose(
        joint.matrix[:, params.gender_index("FEM")], expected_fem, atol=1e-12
    )


def test_model_mi_of_ablated_classifier_with_balanced_contexts():
    """No gender pathway and gender-balanced contexts: model MI vanishes."""
    params, vocab = small_world(seed=8)
    ablated = ablate_gender(params)
    rng = np.random.default_rng(8)
    meanings = [rng.normal(size=2) for _ in range(6)]
    contexts = [("FEM", m) for m in meanings] + [("MSC", m) for m in meanings]
    assert abs(model_mi(ablated, vocab, contexts)) < 1e-10


# ---------------------------------------------------------------------
# interventional quantities
# ---------------------------------------------------------------------


def test_intervention_single_noun_equals_prediction():
    params, vocab = small_world(seed=9)
    meaning = np.array([0.7, -0.1])
    do_dist = intervention_distribution(params, vocab, [meaning], "MSC")
    predicted = predict_adjective_distribution(params, vocab, meaning, "MSC")
    np.testing.assert_allclose(do_dist.probs, predicted.probs, atol=1e-12)


def test_intervention_averages_over_contexts():
    params, vocab = small_world(seed=10)
    m1, m2 = np.array([0.4, 0.4]), np.array([-0.2, 0.9])
    do_dist = intervention_distribution(params, vocab, [m1, m2], "FEM")
    p1 = predict_adjective_distribution(params, vocab, m1, "FEM").probs
    p2 = predict_adjective_distribution(params, vocab, m2, "FEM").probs
    np.testing.assert_allclose(do_dist.probs, 0.5 * (p1 + p2), atol=1e-12)


def test_intervention_family_requires_matching_genders():
    params, vocab = small_world(seed=12)
    weights = CategoricalDistribution(("FEM", "MSC", "NEU"), np.ones(3) / 3)
    with pytest.raises(ValueError, match="do not match"):
        intervention_family(params, vocab, [np.zeros(2)], weights)


def test_family_js_equals_entropy_difference_route():
    """The KL route and the entropy route agree on random classifiers."""
    rng = np.random.default_rng(41)
    for trial in range(50):
        params, vocab = small_world(
            n_adjectives=int(rng.integers(2, 6)),
            d_noun=int(rng.integers(1, 4)),
            hidden=int(rng.integers(1, 5)),
            seed=100 + trial,
        )
        contexts = [rng.normal(size=params.d_noun) for _ in range(4)]
        pi = rng.dirichlet(np.ones(2))
        weights = CategoricalDistribution(params.genders, pi)
        family = intervention_family(params, vocab, contexts, weights)
        np.testing.assert_allclose(
            family_js(family), entropy_difference_mi(family), atol=1e-12
        )


def test_mi_do_of_ablated_classifier_is_zero():
    """Removing the gender block makes every intervention identical."""
    rng = np.random.default_rng(43)
    for trial in range(20):
        params, vocab = small_world(seed=200 + trial)
        ablated = ablate_gender(params)
        contexts = [rng.normal(size=2) for _ in range(5)]
        pi = rng.dirichlet(np.ones(2))
        weights = CategoricalDistribution(params.genders, pi)
        assert abs(mi_do(ablated, vocab, contexts, weights)) < 1e-12


def test_mi_do_positive_for_generic_classifier():
    params, vocab = small_world(seed=14)
    weights = CategoricalDistribution(params.genders, np.array([0.5, 0.5]))
    value = mi_do(params, vocab, [np.array([0.1, 0.2])], weights)
    assert value > 0.0


def test_intervention_family_validates_support_mismatch():
    p = dist([0.5, 0.5], support=("a", "b"))
    q = dist([0.5, 0.5], support=("a", "c"))
    weights = CategoricalDistribution(("FEM", "MSC"), np.array([0.5, 0.5]))
    with pytest.raises(ValueError, match="share a support"):
        InterventionFamily(
            distributions={"FEM": p, "MSC": q}, gender_weights=weights
        )
