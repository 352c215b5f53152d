"""Causal analysis of grammatical gender effects on adjective choice.

The package measures how much the grammatical gender of inanimate nouns
influences which adjectives modify them, separating associational from
interventional (causal) information.  The pipeline: parse dependency
treebanks, extract noun-adjective pairs, train embeddings, fit a small
neural classifier of adjectives given noun semantics and gender, then
compare the classifier's mutual information against the interventional
quantity obtained by forcing each gender on every noun.  A permutation
test over retrained models judges significance.
"""

__version__ = "0.1.0"

from .conllu import ConlluParseError, ParseDiagnostics, Sentence, Token, parse_conllu, read_conllu, write_conllu
from .estimators import (
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
from .extraction import (
    GenderInventory,
    InanimateLexicon,
    PairCorpus,
    corpus_stats,
    extract_pairs,
    read_pairs_tsv,
    strip_adjectives,
    write_pairs_tsv,
)
from .graphvec import RelationGraph, build_graph_vectors, read_relations_tsv
from .model import (
    AdjectiveVocab,
    CategoricalDistribution,
    ClassifierParams,
    Dataset,
    NounEntry,
    TrainConfig,
    TrainResult,
    TrainingDiverged,
    ablate_gender,
    build_dataset,
    empirical_gender_marginal,
    init_params,
    load_checkpoint,
    permute_genders,
    save_checkpoint,
    split_folds,
    train_classifier,
)
from .permtest import (
    PermTestConfig,
    PermTestResult,
    ReportRow,
    pvalue_from_samples,
    run_permutation_test,
    summarize,
    write_summary_csv,
)
from .seeds import child_seed, make_rng
from .sgns import SgnsConfig, train_sgns
from .synth import SynthConfig, build_world, generate_world
from .vectors import (
    VectorTable,
    cosine,
    evaluate_similarity,
    load_vectors,
    load_vectors_file,
    save_vectors,
    save_vectors_file,
)

__all__ = [name for name in dir() if not name.startswith("_")]
