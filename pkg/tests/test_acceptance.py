"""The acceptance gate.

One test per headline criterion, each printing a single PASS line with the
measured numbers when it holds. Tolerances and runtime budgets are asserted,
not aspirational.
"""
import time

import numpy as np
import pytest

from lexloop.classifier import TrainConfig, loss_and_gradient
from lexloop.cli import main as cli_main
from lexloop.engine import (
    COLLECTING,
    FINISHED,
    TRAINING,
    ActiveSession,
    IterationConfig,
    TruthOracle,
    run_session,
)
from lexloop.labels import MENTAL, PHYSICAL
from lexloop.lexicon import (
    Lexicon,
    LexiconEntry,
    ParseError,
    extract_adjectives,
    extract_candidate_pairs,
    parse_sentiwordnet,
    tag_tokens,
    tokenize,
)
from lexloop.metrics import ConfusionCounts, prf1
from lexloop.senticompare import (
    DUAL,
    OBJECTIVE,
    OBJSYN,
    SUBJECTIVE,
    SUBSYN,
    classify_synset,
    classify_words,
    cross_tab,
)
from lexloop.strategies import StrategyKind, select_cal, select_coreset, select_entropy

import oracles
from conftest import fast_train_config, write_lines
from test_senticompare import FIXTURE as SENTI_FIXTURE, MPC as SENTI_MPC


def _pass(criterion: str, detail: str) -> None:
    print(f"PASS {criterion}: {detail}")


# -----------------------------------------------------------------------------


def test_acceptance_strategy_oracle_equivalence():
    """ENTROPY/CORESET/CAL match brute-force oracles on 200 random pools."""
    rng = np.random.default_rng(2024_08)
    started = time.monotonic()
    ties_seen = 0
    for i in range(200):
        view = oracles.random_instance(rng)
        vecs = {w: tuple(view.strategy_vectors[w]) for w in view.unlabeled}
        if len(set(vecs.values())) < len(vecs):
            ties_seen += 1
        assert select_entropy(view) == oracles.oracle_entropy(view), i
        assert select_coreset(view) == oracles.oracle_coreset(view), i
        assert select_cal(view, k=10) == oracles.oracle_cal(view, k=10), i
    elapsed = time.monotonic() - started
    assert elapsed < 10.0
    assert ties_seen >= 20  # exact tie-breaks were genuinely exercised
    _pass(
        "strategy oracle equivalence",
        f"200 instances, {ties_seen} with engineered ties, {elapsed:.1f}s",
    )


def test_acceptance_gradient_matches_finite_differences():
    """Analytic gradients vs central differences, both model variants."""
    started = time.monotonic()
    worst = 0.0
    for variant, hidden in (("logistic", 0), ("hidden", 3)):
        rng = np.random.default_rng(7 if hidden else 11)
        for _ in range(20):
            model, batch = oracles.random_model_and_batch(rng, hidden)
            _, grads = loss_and_gradient(model, batch, weight_decay=0.01)
            fd = oracles.finite_difference_grads(model, batch, 0.01, step=1e-5)
            for name in grads:
                err = oracles.max_relative_error(grads[name], fd[name])
                worst = max(worst, err)
                assert err < 1e-4, (variant, name, err)
    elapsed = time.monotonic() - started
    assert elapsed < 5.0
    _pass(
        "gradient correctness",
        f"40 samples across both variants, worst relative error {worst:.2e}, {elapsed:.1f}s",
    )


def test_acceptance_ingest_pipeline_fidelity(tmp_path):
    """The worked example sentence survives the full ingest path exactly."""
    lexicon = Lexicon(
        {
            "good": LexiconEntry("good", [("a", "having desirable qualities"), ("n", "benefit")]),
            "quality": LexiconEntry("quality", [("n", "an essential attribute")]),
        }
    )
    sentence = "I have found them all to be of good quality."
    pairs = extract_candidate_pairs(tag_tokens(tokenize(sentence), lexicon))
    assert [(p.adjective, p.noun) for p in pairs] == [("good", "quality")]

    corpus = write_lines(tmp_path / "reviews.txt", [sentence])
    assert extract_adjectives(corpus, lexicon) == ["good"]
    _pass("pipeline fidelity", 'one sentence -> [("good", "quality")] -> ["good"]')


def _world_session(world, root, strategy, seed, train=None):
    cfg = IterationConfig(
        strategy=StrategyKind(strategy),
        seed=seed,
        train=train or TrainConfig(),
    )
    return ActiveSession.create(
        root,
        world.pool_words,
        cfg,
        world.lexicon_path,
        world.vectors_path,
        testset_path=world.testset_path,
        clock_kind="sim",
    )


def test_acceptance_loop_bookkeeping(world, tmp_path):
    """Quota/cap arithmetic under alternating and all-negative oracles,
    with the conservation invariant checked on every annotation and again
    by replaying the log from disk."""
    # alternating labels: every iteration closes at exactly 40 with quotas met
    session = _world_session(world, tmp_path / "alt", "entropy", 0, fast_train_config())
    oracle = oracles.AlternatingOracle(first=MENTAL)
    pool_size = len(world.pool_words)
    while session.status != FINISHED:
        if session.status == TRAINING:
            session.train_pending_iteration()
            continue
        task = session.current_task()
        session.submit(task.word, oracle.label(task.word))
        assert len(session.state.unlabeled) + len(session.state.archive) == pool_size
    assert [c.annotations for c in session.completed] == [40] * 5
    assert all(c.quotas_met for c in session.completed)
    assert all(c.pos_filled == c.neg_filled == 20 for c in session.completed)

    replayed = ActiveSession.open(tmp_path / "alt")
    assert replayed.state.snapshot() == session.state.snapshot()

    # all-negative labels: the iteration runs to the cap with an empty
    # positive buffer and 100 uncounted overflow annotations
    negative = _world_session(world, tmp_path / "neg", "entropy", 0, fast_train_config())
    while negative.status == COLLECTING:
        task = negative.current_task()
        negative.submit(task.word, PHYSICAL)
    done = negative.completed[0]
    assert done.annotations == 120
    assert done.pos_filled == 0
    assert done.neg_filled == 20
    assert sum(1 for r in negative.state.archive if not r.counted) == 100

    rebuilt = ActiveSession.open(tmp_path / "neg")
    assert rebuilt.state.snapshot() == negative.state.snapshot()
    _pass(
        "loop bookkeeping",
        "alternating: 5 iterations at m=40; all-negative: m=120 with 0 positives; "
        "conservation held through replay",
    )


def test_acceptance_end_to_end_simulation(world, tmp_path):
    """Full loop on the 500-word two-Gaussian world: entropy reaches the F1
    bar and needs no more annotations per iteration than random picking."""
    started = time.monotonic()
    oracle_truth = TruthOracle(world.truth)
    annotations = {"entropy": [], "random": []}
    entropy_best_f1 = 0.0
    for strategy in ("entropy", "random"):
        for seed in range(5):
            session = _world_session(
                world, tmp_path / f"{strategy}{seed}", strategy, seed
            )
            report = run_session(session, oracle_truth)
            assert len(report.iterations) == 5
            annotations[strategy].extend(r.annotations for r in report.iterations)
            if strategy == "entropy":
                entropy_best_f1 = max(
                    entropy_best_f1, max(r.mental.f1 for r in report.iterations)
                )

    assert entropy_best_f1 >= 0.85
    entropy_mean = sum(annotations["entropy"]) / len(annotations["entropy"])
    random_mean = sum(annotations["random"]) / len(annotations["random"])
    assert entropy_mean <= random_mean
    elapsed = time.monotonic() - started
    assert elapsed < 60.0
    _pass(
        "end-to-end simulation",
        f"best mental F1 {entropy_best_f1:.3f}, annotations/iteration "
        f"{entropy_mean:.1f} (entropy) vs {random_mean:.1f} (random), {elapsed:.1f}s",
    )


def test_acceptance_metric_identities():
    """Hand-computed precision/recall/F1 fixtures and the 26/74 testset case."""
    perfect = prf1(ConfusionCounts(tp=26, fp=0, fn=0, tn=74), MENTAL)
    assert (perfect.precision, perfect.recall, perfect.f1) == (1.0, 1.0, 1.0)

    half = prf1(ConfusionCounts(tp=13, fp=13, fn=13, tn=61), MENTAL)
    assert (half.precision, half.recall, half.f1) == (0.5, 0.5, 0.5)

    mixed = prf1(ConfusionCounts(tp=18, fp=4, fn=8, tn=70), MENTAL)
    assert mixed.precision == pytest.approx(0.818, abs=1e-3)
    assert mixed.recall == pytest.approx(0.692, abs=1e-3)
    assert mixed.f1 == pytest.approx(0.750, abs=1e-3)

    # a predict-nothing-mental model on the 26-mental / 74-physical split
    constant = ConfusionCounts(tp=0, fp=0, fn=26, tn=74)
    mental = prf1(constant, MENTAL)
    physical = prf1(constant, PHYSICAL)
    assert (mental.precision, mental.recall, mental.f1) == (0.0, 0.0, 0.0)
    assert mental.degenerate
    assert physical.recall == 1.0
    assert physical.precision == pytest.approx(0.74)
    _pass("metric identities", "three P/R/F1 fixtures at 1e-3 plus the 26/74 case")


def test_acceptance_sentiment_crosstab(tmp_path):
    """The 12-synset / 8-word fixture matches a fully manual tally."""
    expected_synsets = {
        "s01": SUBSYN, "s02": SUBSYN, "s03": OBJSYN, "s04": SUBSYN,
        "s05": OBJSYN, "s06": OBJSYN, "s07": OBJSYN, "s08": SUBSYN,
        "s09": OBJSYN, "s10": SUBSYN, "s11": SUBSYN, "s12": OBJSYN,
    }
    assert {s.synset_id: classify_synset(s) for s in SENTI_FIXTURE} == expected_synsets

    words = classify_words(SENTI_FIXTURE)
    assert {w: ws.label for w, ws in words.items()} == {
        "gloomy": SUBJECTIVE, "blue": SUBJECTIVE, "brisk": SUBJECTIVE,
        "pensive": OBJECTIVE, "stony": OBJECTIVE, "damp": OBJECTIVE,
        "merry": DUAL, "hollow": DUAL,
    }

    tab = cross_tab(SENTI_MPC, words)
    assert tab.counts[MENTAL] == {SUBJECTIVE: 2, OBJECTIVE: 1, DUAL: 1}
    assert tab.counts[PHYSICAL] == {SUBJECTIVE: 1, OBJECTIVE: 2, DUAL: 1}
    assert tab.percentages(MENTAL) == {SUBJECTIVE: 50, OBJECTIVE: 25, DUAL: 25}

    corrupt = write_lines(
        tmp_path / "senti.tsv",
        ["a\t00000666\t0.625\t0.5\tbroken#1\tscores exceed one"],
    )
    with pytest.raises(ParseError, match="00000666"):
        parse_sentiwordnet(corrupt)
    _pass(
        "sentiment cross-tab",
        "12 synsets, 8 words, 2x3 table tallied by hand; corrupt line rejected",
    )


def test_acceptance_determinism(world, tmp_path, capsys):
    """Repeated runs are byte-identical; a killed session resumes exactly."""
    argv = lambda out: [
        "run",
        "--oracle", str(world.truth_path),
        "--lexicon", str(world.lexicon_path),
        "--vectors", str(world.vectors_path),
        "--testset", str(world.testset_path),
        "--out", str(out),
        "--seed", "4", "--seeds", "1",
        "--iterations", "2", "--pos-quota", "5", "--neg-quota", "5", "--cap", "20",
        "--epochs", "6", "--lr-drop-epoch", "3", "--batch-size", "8",
        "--format", "records",
    ]
    outputs = []
    for name in ("first", "second"):
        assert cli_main(argv(tmp_path / name)) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    for artifact in ("report", "metrics.jsonl", "annotations.log"):
        a = (tmp_path / "first" / "entropy-seed4" / artifact).read_bytes()
        b = (tmp_path / "second" / "entropy-seed4" / artifact).read_bytes()
        assert a == b, artifact

    # kill one session mid-iteration and resume it; both histories converge
    truth = TruthOracle(world.truth)
    straight = _world_session(world, tmp_path / "straight", "entropy", 9, fast_train_config())
    interrupted = _world_session(world, tmp_path / "resumed", "entropy", 9, fast_train_config())
    for _ in range(17):
        task = interrupted.current_task()
        interrupted.submit(task.word, truth.label(task.word))
    partial = interrupted.state.snapshot()
    del interrupted  # the process dies here

    resumed = ActiveSession.open(tmp_path / "resumed")
    assert resumed.state.snapshot() == partial
    run_session(resumed, truth)
    run_session(straight, truth)
    for artifact in ("annotations.log", "metrics.jsonl", "report"):
        a = (tmp_path / "straight" / artifact).read_bytes()
        b = (tmp_path / "resumed" / artifact).read_bytes()
        assert a == b, artifact
    _pass(
        "determinism",
        "same-seed runs byte-identical; kill-and-resume matched the straight run",
    )
