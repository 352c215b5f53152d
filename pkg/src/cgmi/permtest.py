"""Permutation test for the interventional gender-adjective effect.

Protocol: split the nouns into cross-validation folds; per fold, train a
classifier on the unpermuted training fold and record its interventional
MI, then retrain from scratch k times under uniformly permuted gender
labels.  The p-value is the fraction of permuted runs whose statistic
exceeds the observed one for their own fold.

All run seeds derive from the base seed through named sub-streams keyed by
(fold, run index), so serial and thread-pooled executions produce identical
results.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .estimators import mi_do
from .model import (
    TrainConfig,
    TrainingDiverged,
    empirical_gender_marginal,
    permute_genders,
    split_folds,
    train_classifier,
)
from .seeds import child_seed, make_rng


@dataclass
class PermTestConfig:
    permutations: int = 200            # heavyweight analyses want 2000
    folds: int = 5
    subset: int = 100                  # adjective vocabulary cap for the test
    alpha: float = 0.05
    seed: int = 0
    smoothed: bool = False             # (b+1)/(n+1) instead of the raw proportion
    threads: int = 1
    noun_weighting: str = "types"      # context weights in the backdoor average
    marginal_weighting: str = "tokens" # gender marginal over the training fold
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.permutations < 1:
            raise ValueError("permutations must be >= 1")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0, 1)")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass
class PermTestResult:
    observed: list                 # statistic per fold, unpermuted labels
    permuted: np.ndarray           # (folds, permutations) permuted statistics
    fold_p_values: list            # per-fold fraction of permuted > observed
    p_value: float
    mean_difference: float         # mean(observed) - mean(permuted)
    reject: bool
    config: PermTestConfig

    def __post_init__(self):
        self.permuted = np.asarray(self.permuted, dtype=np.float64)
        folds, k = self.permuted.shape
        if folds != self.config.folds or k != self.config.permutations:
            raise ValueError("permuted sample shape does not match the config")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p_value {self.p_value!r} outside [0, 1]")

    def recompute_p_value(self):
        """p-value from the stored samples; must equal the reported one."""
        return pvalue_from_samples(
            self.observed, self.permuted, smoothed=self.config.smoothed
        )


def pvalue_from_samples(observed, permuted, smoothed=False):
    permuted = np.asarray(permuted, dtype=np.float64)
    exceed = sum(
        int(np.sum(permuted[f] > obs)) for f, obs in enumerate(observed)
    )
    total = permuted.size
    if smoothed:
        return (exceed + 1) / (total + 1)
    return exceed / total


def _restrict_to_subset(dataset, vocab, subset):
    """Cap the adjective vocabulary at the subset most frequent types.

    The vocab is frequency-ordered, so indices below `subset` survive
    unchanged.  Nouns left without any in-subset adjective are dropped and
    noun weights are recomputed from the retained tokens.
    """
    if subset > len(vocab):
        raise ValueError(f"subset {subset} exceeds vocabulary size {len(vocab)}")
    if subset == len(vocab):
        return dataset, vocab
    small_vocab = vocab.top(subset)
    entries = []
    for noun, counts in dataset.entries:
        kept = {index: count for index, count in counts.items() if index < subset}
        if kept:
            entries.append((replace(noun, weight=sum(kept.values())), kept))
    if not entries:
        raise ValueError("no noun retains any adjective inside the subset")
    return type(dataset)(entries=entries, split=dataset.split), small_vocab


def _fold_statistic(params, vocab, train_fold, genders, cfg):
    """Interventional MI over the training fold's contexts and marginal."""
    pi = empirical_gender_marginal(train_fold, genders, weighting=cfg.marginal_weighting)
    weights = None if cfg.noun_weighting == "types" else "tokens"
    return mi_do(params, vocab, train_fold.nouns(), pi, weights=weights)


def _train_once(data, vocab, genders, cfg, *labels):
    """Train with a derived seed; on divergence resample once, then fail."""
    for attempt in ("a", "b"):
        seed = child_seed(cfg.seed, *labels, attempt)
        try:
            return train_classifier(
                data, vocab, replace(cfg.train, seed=seed), genders=genders
            ).params
        except TrainingDiverged:
            if attempt == "b":
                raise
    raise AssertionError("unreachable")


def _run_fold_observed(fold_index, train_fold, vocab, genders, cfg):
    params = _train_once(train_fold, vocab, genders, cfg, "fold", str(fold_index), "obs")
    return _fold_statistic(params, vocab, train_fold, genders, cfg)


def _run_fold_permutation(fold_index, run_index, train_fold, vocab, genders, cfg):
    rng = make_rng(cfg.seed, "fold", str(fold_index), "perm", str(run_index))
    shuffled = permute_genders(train_fold, rng)
    params = _train_once(
        shuffled, vocab, genders, cfg, "fold", str(fold_index), "run", str(run_index)
    )
    return _fold_statistic(params, vocab, shuffled, genders, cfg)


def run_permutation_test(data, vocab, cfg: PermTestConfig) -> PermTestResult:
    """Execute the full fold-and-permute protocol.

    Returns the per-fold observed statistics, the complete permuted sample
    (folds x permutations), and the pooled p-value: the count of permuted
    statistics strictly above their fold's observed value, divided by
    folds * permutations.
    """
    data, vocab = _restrict_to_subset(data, vocab, cfg.subset)
    genders = sorted({noun.gender for noun in data.nouns()})
    fold_pairs = split_folds(data, folds=cfg.folds, seed=cfg.seed)
    train_folds = [train for train, _ in fold_pairs]

    observed = [
        _run_fold_observed(f, train_folds[f], vocab, genders, cfg)
        for f in range(cfg.folds)
    ]
    permuted = np.zeros((cfg.folds, cfg.permutations))
    tasks = [(f, j) for f in range(cfg.folds) for j in range(cfg.permutations)]
    if cfg.threads == 1:
        for f, j in tasks:
            permuted[f, j] = _run_fold_permutation(
                f, j, train_folds[f], vocab, genders, cfg
            )
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            futures = {
                (f, j): pool.submit(
                    _run_fold_permutation, f, j, train_folds[f], vocab, genders, cfg
                )
                for f, j in tasks
            }
        for (f, j), future in futures.items():
            permuted[f, j] = future.result()

    fold_p = [
        float(np.sum(permuted[f] > observed[f])) / cfg.permutations
        for f in range(cfg.folds)
    ]
    p_value = pvalue_from_samples(observed, permuted, smoothed=cfg.smoothed)
    mean_difference = float(np.mean(observed) - np.mean(permuted))
    return PermTestResult(
        observed=observed,
        permuted=permuted,
        fold_p_values=fold_p,
        p_value=p_value,
        mean_difference=mean_difference,
        reject=p_value < cfg.alpha,
        config=cfg,
    )


def save_result(result: PermTestResult, path):
    """Full JSON record including the audit copy of every permuted sample."""
    payload = {
        "observed": [float(x) for x in result.observed],
        "permuted": [[float(x) for x in row] for row in result.permuted],
        "fold_p_values": [float(x) for x in result.fold_p_values],
        "p_value": result.p_value,
        "mean_difference": result.mean_difference,
        "reject": result.reject,
        "config": {
            "permutations": result.config.permutations,
            "folds": result.config.folds,
            "subset": result.config.subset,
            "alpha": result.config.alpha,
            "seed": result.config.seed,
            "smoothed": result.config.smoothed,
            "noun_weighting": result.config.noun_weighting,
            "marginal_weighting": result.config.marginal_weighting,
        },
    }
    with open(path, "w", encoding="utf-8") as stream:
        json.dump(payload, stream, sort_keys=True)
        stream.write("\n")


@dataclass
class ReportRow:
    """One summary line: a language/representation pair and its estimates."""

    language: str
    representation: str
    model_mi: float
    mi_do: float
    mean_difference: float | None = None
    p_value: float | None = None

    @property
    def significant(self):
        return self.p_value is not None and self.p_value < 0.05


def _format_value(value):
    if value is None:
        return "-"
    if value != value:   # NaN
        return "nan"
    if abs(value) >= 0.01 or value == 0:
        return f"{value:.3f}"
    return f"{value:.2e}"


def summarize(rows) -> str:
    """Plain-text table of estimates, one row per language/representation.

    Columns: model-based MI, model-based interventional MI, and the mean
    difference against permuted retraining, starred when p < .05.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("at least one result row is required")
    header = ("Language", "Representation", "Model MI", "Model MI_do", "Mean diff. perturbed")
    table = [header]
    for row in rows:
        diff = _format_value(row.mean_difference) + ("*" if row.significant else "")
        table.append(
            (
                row.language,
                row.representation,
                _format_value(row.model_mi),
                _format_value(row.mi_do),
                diff,
            )
        )
    widths = [max(len(line[c]) for line in table) for c in range(len(header))]
    lines = []
    for line in table:
        lines.append("  ".join(cell.ljust(widths[c]) for c, cell in enumerate(line)).rstrip())
    return "\n".join(lines) + "\n"


def write_summary_csv(rows, path):
    """CSV mirror of the summary table, one row per (language, representation)."""
    rows = list(rows)
    if not rows:
        raise ValueError("at least one result row is required")
    with open(path, "w", encoding="utf-8", newline="") as stream:
        writer = csv.writer(stream)
        writer.writerow(
            ["language", "representation", "model_mi", "mi_do",
             "mean_diff_perturbed", "p_value", "significant"]
        )
        for row in rows:
            writer.writerow(
                [
                    row.language,
                    row.representation,
                    repr(float(row.model_mi)),
                    repr(float(row.mi_do)),
                    "" if row.mean_difference is None else repr(float(row.mean_difference)),
                    "" if row.p_value is None else repr(float(row.p_value)),
                    int(row.significant),
                ]
            )
