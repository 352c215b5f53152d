"""Synthetic worlds with known causal structure, for validation.

A world is a finite instance of the generative story: a handful of noun
meanings, a gender assignment process, and a teacher classifier that emits
adjectives conditioned on (gender, meaning).  The generator writes a
CoNLL-U corpus sampled from the teacher together with every artifact the
pipeline needs (lexicon, vector files, teacher checkpoint) and a ground
truth record whose quantities are computed by brute-force summation in
plain Python, independent of the estimator code.

World cases mirror the structural taxonomy:
  case 1   gender independent of meaning, gender affects adjectives
  case 2   gender determined by meaning, no effect on adjectives
  case 3   both edges present (confounded world)
  null     gender independent of meaning and without effect
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .conllu import Sentence, Token, write_conllu
from .extraction import UD_GENDER_LABELS
from .model import ClassifierParams, save_checkpoint
from .seeds import make_rng
from .vectors import VectorTable, save_vectors_file

CASES = ("1", "2", "3", "null")

# UD FEATS value for each internal gender label.
_UD_VALUE = {label: ud for ud, label in UD_GENDER_LABELS.items()}


@dataclass
class SynthConfig:
    case: str = "3"
    nouns: int = 16
    adjectives: int = 12
    noun_dim: int = 6
    adjective_dim: int = 6
    hidden: int = 12
    genders: tuple = ("FEM", "MSC")
    gender_effect: float = 4.0      # depth of the gender gate on hidden units
    effect_target: float = 0.25     # calibrated interventional MI in bits, or None
    coupling: float = 1.5           # meaning-to-gender strength in the confounded case
    tokens_per_noun: int = 2000
    activation: str = "tanh"
    seed: int = 0

    def __post_init__(self):
        self.case = str(self.case)
        if self.case not in CASES:
            raise ValueError(f"case must be one of {CASES}")
        self.genders = tuple(self.genders)
        if not 2 <= len(self.genders) <= 3:
            raise ValueError("synthetic worlds use 2 or 3 genders")
        if self.nouns < len(self.genders) or self.adjectives < 2:
            raise ValueError("world too small to be informative")
        if self.tokens_per_noun < 1:
            raise ValueError("tokens_per_noun must be >= 1")
        if self.effect_target is not None:
            ceiling = math.log2(len(self.genders))
            if not 0.0 < self.effect_target < ceiling:
                raise ValueError(
                    f"effect_target must lie in (0, {ceiling:.3f}) bits "
                    f"for {len(self.genders)} genders"
                )
        for label in self.genders:
            if label not in _UD_VALUE:
                raise ValueError(f"no treebank feature value for gender {label!r}")

    @property
    def effect_scale(self):
        return 0.0 if self.case in ("2", "null") else self.gender_effect

    @property
    def meaning_coupled(self):
        return self.case in ("2", "3")


@dataclass(eq=False)
class SynthWorld:
    config: SynthConfig
    noun_lemmas: list
    adjective_lemmas: list
    meanings: np.ndarray          # (nouns, noun_dim)
    adjective_vectors: np.ndarray # (adjectives, adjective_dim)
    teacher: ClassifierParams
    p_gender_given_noun: np.ndarray   # (nouns, genders)
    realized_genders: list            # one label per noun


_W_SCALE = 1.2
_TOP_SCALE = 2.4


def build_world(config: SynthConfig) -> SynthWorld:
    """Draw a world: meanings, teacher weights, and the gender process."""
    n, a = config.nouns, config.adjectives
    noun_lemmas = [f"noun{i:02d}" for i in range(n)]
    adjective_lemmas = [f"adj{i:02d}" for i in range(a)]

    meanings = make_rng(config.seed, "synth", "meanings").normal(
        size=(n, config.noun_dim)
    ) / math.sqrt(config.noun_dim)
    adjective_vectors = make_rng(config.seed, "synth", "adjectives").normal(
        size=(a, config.adjective_dim)
    ) / math.sqrt(config.adjective_dim)
    n_genders = len(config.genders)

    if config.case == "2":
        # Gender is a deterministic, balanced function of meaning: rank the
        # nouns along a random direction and cut into equal groups.  The
        # realized lexicalization then coincides with the distribution-level
        # gender process, so the ground truth has no sampling slack.
        direction = make_rng(config.seed, "synth", "coupling").normal(size=config.noun_dim)
        order = np.argsort(meanings @ direction, kind="stable")
        p_matrix = np.zeros((n, n_genders))
        realized = [None] * n
        for gi, block in enumerate(np.array_split(order, n_genders)):
            for noun_idx in block.tolist():
                p_matrix[noun_idx, gi] = 1.0
                realized[noun_idx] = config.genders[gi]
    elif config.case == "3":
        # Partial coupling: gender depends on the meaning through per-gender
        # projections plus latent noise.  Deterministic coupling would leave
        # the causal pathway unidentifiable from the realized corpus (the
        # meaning alone explains every gender-linked regularity), so the
        # confounded world keeps p(g | n) strictly inside (0, 1).
        directions = make_rng(config.seed, "synth", "coupling").normal(
            size=(config.noun_dim, n_genders)
        )
        logits = meanings @ directions
        # Standardize the per-noun contrasts, not the columns: only logit
        # differences between genders matter, and column-wise scaling can
        # zero them out when the meaning space is one-dimensional.
        logits -= logits.mean(axis=1, keepdims=True)
        logits *= config.coupling / max(float(logits.std()), 1e-9)
        p_matrix = np.exp(logits - logits.max(axis=1, keepdims=True))
        p_matrix /= p_matrix.sum(axis=1, keepdims=True)
        # Every gender must be lexicalized by at least one noun, else the
        # realized world cannot carry an interventional contrast.
        for attempt in range(64):
            labels = ["synth", "lexicalize"] + ([str(attempt)] if attempt else [])
            rng_lex = make_rng(config.seed, *labels)
            draws = [rng_lex.choice(n_genders, p=p_matrix[i]) for i in range(n)]
            if len(set(draws)) == n_genders:
                break
        else:
            raise ValueError("could not lexicalize every gender; increase nouns")
        realized = [config.genders[gi] for gi in draws]
    else:
        p_matrix = np.full((n, n_genders), 1.0 / n_genders)
        draws = make_rng(config.seed, "synth", "lexicalize").integers(0, n_genders, size=n)
        realized = [config.genders[gi] for gi in draws.tolist()]

    # Teacher draws occasionally land where the calibration target cannot
    # be reached at any sharpness (both genders favoring the same
    # adjective, for instance), so redraw deterministically until it can.
    last_error = None
    for attempt in range(_TEACHER_DRAWS):
        labels = ["synth", "teacher"] + ([str(attempt)] if attempt else [])
        teacher = _draw_teacher(config, make_rng(config.seed, *labels),
                                adjective_vectors, meanings)
        world = SynthWorld(
            config=config,
            noun_lemmas=noun_lemmas,
            adjective_lemmas=adjective_lemmas,
            meanings=meanings,
            adjective_vectors=adjective_vectors,
            teacher=teacher,
            p_gender_given_noun=p_matrix,
            realized_genders=realized,
        )
        if config.effect_scale == 0 or config.effect_target is None:
            return world
        try:
            _calibrate_effect(world)
            return world
        except ValueError as err:
            last_error = err
    raise ValueError(f"could not plant the requested effect: {last_error}")


_TEACHER_DRAWS = 8


def _draw_teacher(config, rng, adjective_vectors, meanings) -> ClassifierParams:
    n_genders = len(config.genders)
    fan_in = config.adjective_dim + config.noun_dim + n_genders
    W = rng.normal(scale=_W_SCALE, size=(config.hidden, fan_in))
    # The first half of the hidden bank holds gender-gated adjective
    # detectors: they ignore the noun, keep bias 0 under their own gender
    # (unit h listens to gender h mod G), and sit in saturation under the
    # rest.  Gender then tilts adjective scores the same way for every
    # noun, which survives averaging over nouns in the interventional
    # distributions.  A plain random gender block cannot plant a sizable
    # effect: growing it saturates every unit and scores go adjective
    # blind.  The second half models noun-adjective interaction and stays
    # active for all genders.
    half = config.hidden // 2
    W[:half, config.adjective_dim : config.adjective_dim + config.noun_dim] = 0.0
    gate = np.zeros((config.hidden, n_genders))
    gate[:half, :] = -config.effect_scale
    gate[np.arange(half), np.arange(half) % n_genders] = 0.0
    W[:, config.adjective_dim + config.noun_dim :] = gate
    w = rng.normal(scale=_TOP_SCALE / math.sqrt(config.hidden), size=config.hidden)
    if config.effect_scale > 0:
        w[:half] *= _gender_unit_gain(config, W, w, half, adjective_vectors, meanings)
    return ClassifierParams(
        W=W,
        w=w,
        activation=config.activation,
        hidden=config.hidden,
        d_adj=config.adjective_dim,
        d_noun=config.noun_dim,
        genders=config.genders,
    )


_TILT_RATIO = 1.5


def _gender_unit_gain(config, W, w, half, adjective_vectors, meanings):
    """Gain that balances the gender tilt against the noun interaction.

    The raw draw leaves the between-gender score tilt anywhere from
    negligible to dominant relative to the noun-adjective part, which makes
    the attainable interventional MI a seed lottery.  Rescaling the gated
    units so the tilt spread is a fixed multiple of the interaction spread
    removes that variance; the global calibration below then only has to
    set the overall sharpness.
    """
    d_a, d_n = config.adjective_dim, config.noun_dim
    act = np.tanh if config.activation == "tanh" else lambda x: np.maximum(x, 0.0)
    adj_part = W[:half, :d_a] @ adjective_vectors.T        # (half, A)
    gate_part = W[:half, d_a + d_n :]                      # (half, G)
    pre_tilt = adj_part[:, None, :] + gate_part[:, :, None]
    tilt = np.einsum("h,hga->ga", w[:half], act(pre_tilt))
    tilt -= tilt.mean(axis=1, keepdims=True)
    spread_tilt = float(np.std(tilt[1:] - tilt[0]))
    inter_adj = W[half:, :d_a] @ adjective_vectors.T       # (rest, A)
    inter_noun = W[half:, d_a : d_a + d_n] @ meanings.T    # (rest, N)
    pre_inter = inter_adj[:, None, :] + inter_noun[:, :, None]
    inter = np.einsum("h,hna->na", w[half:], act(pre_inter))
    inter -= inter.mean(axis=1, keepdims=True)
    spread_inter = float(np.std(inter))
    if spread_tilt < 1e-12:
        raise ValueError("degenerate teacher draw: gender tilt has no spread")
    return _TILT_RATIO * max(spread_inter, 1e-6) / spread_tilt


def _teacher_mi_do(world: SynthWorld) -> float:
    """Interventional MI of the realized world in bits, vectorized.

    This is the estimand the pipeline targets: every realized noun forced
    into every gender, with the gender marginal from the lexicon.
    Generator-internal: the published ground truth record is recomputed by
    the plain-Python brute force below, not by this helper.
    """
    cfg = world.config
    d_a, d_n = cfg.adjective_dim, cfg.noun_dim
    W, w = world.teacher.W, world.teacher.w
    z_adj = W[:, :d_a] @ world.adjective_vectors.T          # (H, A)
    z_noun = W[:, d_a : d_a + d_n] @ world.meanings.T       # (H, N)
    z_gen = W[:, d_a + d_n :]                               # (H, G)
    pre = (
        z_noun.T[:, None, :, None]
        + z_gen.T[None, :, :, None]
        + z_adj[None, None, :, :]
    )                                                       # (N, G, H, A)
    hidden = np.tanh(pre) if cfg.activation == "tanh" else np.maximum(pre, 0.0)
    scores = np.einsum("h,nghb->ngb", w, hidden)            # (N, G, A)
    scores -= scores.max(axis=2, keepdims=True)
    probs = np.exp(scores)
    probs /= probs.sum(axis=2, keepdims=True)
    p_do = probs.mean(axis=0)                               # (G, A)
    pi = np.array(
        [world.realized_genders.count(g) for g in cfg.genders], dtype=np.float64
    )
    pi /= pi.sum()
    mix = pi @ p_do
    kl = np.where(p_do > 0, p_do * np.log2(p_do / mix), 0.0).sum(axis=1)
    return float(pi @ kl)


def _calibrate_effect(world: SynthWorld):
    """Rescale the teacher's top layer until MI_do hits the configured target.

    The raw random teacher leaves the planted effect at the mercy of the
    seed, spanning an order of magnitude.  MI_do grows from 0 with the top
    layer scale, so a geometric scan plus bisection pins it precisely and
    deterministically.
    """
    target = world.config.effect_target
    base = world.teacher.w.copy()

    def mi_at(scale):
        world.teacher.w[...] = base * scale
        return _teacher_mi_do(world)

    grid = np.geomspace(2.0 ** -10, 2.0 ** 6, 129)
    values = np.array([mi_at(scale) for scale in grid])
    if values.max() < target:
        raise ValueError(
            f"planted effect of {target} bits is unreachable for this seed; "
            f"maximum attainable is {values.max():.4f} bits"
        )
    upper = int(np.argmax(values >= target))
    if upper == 0:
        mi_at(grid[0])
        return
    low, high = grid[upper - 1], grid[upper]
    for _ in range(80):
        mid = math.sqrt(low * high)
        if mi_at(mid) < target:
            low = mid
        else:
            high = mid
    mi_at(high)


def _oracle_conditionals(world: SynthWorld):
    """p(adjective | gender, noun) for every noun and gender, plain Python.

    Deliberately avoids the classifier code and numpy: nested loops over
    weight lists, math.tanh, and fsum-normalized softmax.
    """
    cfg = world.config
    W = world.teacher.W.tolist()
    w = world.teacher.w.tolist()
    E = world.adjective_vectors.tolist()
    meanings = world.meanings.tolist()
    d_a, d_n = cfg.adjective_dim, cfg.noun_dim
    use_tanh = cfg.activation == "tanh"
    conditionals = []
    for noun in meanings:
        per_gender = []
        for gi in range(len(cfg.genders)):
            scores = []
            for adj in E:
                score = 0.0
                for j in range(cfg.hidden):
                    row = W[j]
                    z = math.fsum(
                        [row[k] * adj[k] for k in range(d_a)]
                        + [row[d_a + k] * noun[k] for k in range(d_n)]
                        + [row[d_a + d_n + gi]]
                    )
                    h = math.tanh(z) if use_tanh else max(z, 0.0)
                    score += w[j] * h
                scores.append(score)
            peak = max(scores)
            exp_scores = [math.exp(s - peak) for s in scores]
            total = math.fsum(exp_scores)
            per_gender.append([v / total for v in exp_scores])
        conditionals.append(per_gender)
    return conditionals   # [noun][gender][adjective]


def _oracle_mi_from_joint(joint):
    """MI of a [gender][adjective] probability table, plain loops, bits."""
    genders = len(joint)
    adjectives = len(joint[0])
    p_g = [math.fsum(joint[g]) for g in range(genders)]
    p_a = [math.fsum(joint[g][a] for g in range(genders)) for a in range(adjectives)]
    terms = []
    for g in range(genders):
        for a in range(adjectives):
            value = joint[g][a]
            if value > 0.0:
                terms.append(value * math.log2(value / (p_g[g] * p_a[a])))
    return math.fsum(terms)


def _oracle_quantities(world: SynthWorld, conditionals):
    """Brute-force MI(A;G) and interventional MI over the finite model."""
    cfg = world.config
    n = cfg.nouns
    n_genders = len(cfg.genders)
    adjectives = cfg.adjectives
    p_noun = [1.0 / n] * n
    p_gn = world.p_gender_given_noun.tolist()

    # Associational joint: p(a, g) = sum_n p(n) p(g | n) p(a | g, n).
    joint = [
        [
            math.fsum(
                p_noun[i] * p_gn[i][g] * conditionals[i][g][a] for i in range(n)
            )
            for a in range(adjectives)
        ]
        for g in range(n_genders)
    ]
    mi = _oracle_mi_from_joint(joint)

    # Interventional: p(a | do(g)) averages the conditional over p(n) for
    # every noun, and the gender marginal comes from the gender process.
    gender_marginal = [
        math.fsum(p_noun[i] * p_gn[i][g] for i in range(n)) for g in range(n_genders)
    ]
    p_do = [
        [
            math.fsum(p_noun[i] * conditionals[i][g][a] for i in range(n))
            for a in range(adjectives)
        ]
        for g in range(n_genders)
    ]
    do_joint = [
        [gender_marginal[g] * p_do[g][a] for a in range(adjectives)]
        for g in range(n_genders)
    ]
    mi_do = _oracle_mi_from_joint(do_joint)

    # Realized-lexicalization analogs: uniform weight on each noun with its
    # drawn gender.  For meaning-coupled worlds these equal mi and mi_do.
    realized_idx = [cfg.genders.index(g) for g in world.realized_genders]
    realized_marginal = [
        sum(1.0 for gi in realized_idx if gi == g) / n for g in range(n_genders)
    ]
    realized_joint = [
        [
            math.fsum(
                p_noun[i] * conditionals[i][g][a]
                for i in range(n)
                if realized_idx[i] == g
            )
            for a in range(adjectives)
        ]
        for g in range(n_genders)
    ]
    model_mi_realized = _oracle_mi_from_joint(realized_joint)
    realized_do_joint = [
        [realized_marginal[g] * p_do[g][a] for a in range(adjectives)]
        for g in range(n_genders)
    ]
    mi_do_realized = _oracle_mi_from_joint(realized_do_joint)

    return {
        "gender_marginal": gender_marginal,
        "mi": mi,
        "mi_do": mi_do,
        "realized_gender_marginal": realized_marginal,
        "model_mi_realized": model_mi_realized,
        "mi_do_realized": mi_do_realized,
    }


def ground_truth_record(world: SynthWorld) -> dict:
    conditionals = _oracle_conditionals(world)
    record = {
        "case": world.config.case,
        "config": asdict(world.config) | {"genders": list(world.config.genders)},
        "gender_labels": list(world.config.genders),
        "p_noun": [1.0 / world.config.nouns] * world.config.nouns,
        "p_gender_given_noun": world.p_gender_given_noun.tolist(),
        "realized_genders": dict(zip(world.noun_lemmas, world.realized_genders)),
        "log_base": 2,
    }
    record.update(_oracle_quantities(world, conditionals))
    return record


def sample_counts(world: SynthWorld):
    """Adjective token counts per noun under the realized genders."""
    from .model import AdjectiveVocab, predict_adjective_distribution

    vocab = AdjectiveVocab(
        lemmas=tuple(world.adjective_lemmas),
        matrix=world.adjective_vectors,
        frequencies=tuple([1] * len(world.adjective_lemmas)),
    )
    rng = make_rng(world.config.seed, "synth", "tokens")
    counts = []
    for i, lemma in enumerate(world.noun_lemmas):
        dist = predict_adjective_distribution(
            world.teacher, vocab, world.meanings[i], world.realized_genders[i]
        )
        counts.append(rng.multinomial(world.config.tokens_per_noun, dist.probs))
    return np.stack(counts)


def corpus_sentences(world: SynthWorld, counts):
    """Two-token sentences (adjective modifying a gendered noun)."""
    for i, noun in enumerate(world.noun_lemmas):
        ud_gender = _UD_VALUE[world.realized_genders[i]]
        for a, count in enumerate(counts[i].tolist()):
            adjective = world.adjective_lemmas[a]
            for _ in range(count):
                yield Sentence(
                    tokens=(
                        Token(
                            index=1,
                            form=adjective,
                            lemma=adjective,
                            upos="ADJ",
                            feats={},
                            head=2,
                            deprel="amod",
                        ),
                        Token(
                            index=2,
                            form=noun,
                            lemma=noun,
                            upos="NOUN",
                            feats={"Gender": ud_gender},
                            head=0,
                            deprel="root",
                        ),
                    ),
                )


def write_world(world: SynthWorld, out_dir) -> dict:
    """Write corpus, lexicon, vector files, teacher, and ground truth.

    Returns the ground truth record.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    counts = sample_counts(world)
    with open(out / "corpus.conllu", "w", encoding="utf-8") as stream:
        write_conllu(corpus_sentences(world, counts), stream)

    (out / "lexicon.txt").write_text(
        "".join(f"{lemma}\n" for lemma in world.noun_lemmas), encoding="utf-8"
    )

    save_vectors_file(
        VectorTable(
            dim=world.config.noun_dim,
            vectors={l: world.meanings[i] for i, l in enumerate(world.noun_lemmas)},
        ),
        out / "vectors_nouns.txt",
    )
    save_vectors_file(
        VectorTable(
            dim=world.config.adjective_dim,
            vectors={
                l: world.adjective_vectors[i]
                for i, l in enumerate(world.adjective_lemmas)
            },
        ),
        out / "vectors_adjectives.txt",
    )

    save_checkpoint(
        world.teacher,
        out / "teacher.json",
        extra={
            "role": "synthetic-teacher",
            "case": world.config.case,
            "seed": world.config.seed,
        },
    )

    record = ground_truth_record(world)
    with open(out / "ground_truth.json", "w", encoding="utf-8") as stream:
        json.dump(record, stream, sort_keys=True, indent=1)
        stream.write("\n")
    return record


def generate_world(config: SynthConfig, out_dir) -> dict:
    return write_world(build_world(config), out_dir)
