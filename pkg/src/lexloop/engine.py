"""The acquisition loop: quota-driven annotation iterations over a word pool,
with per-iteration retraining and a durable, replayable session log.

A session lives in a directory: `config` (key = value lines), `pool` (the
initial unlabeled words in order), `annotations.log` (one JSON record per
label, appended and fsynced before the label is acknowledged),
`metrics.jsonl` and one classifier checkpoint per completed iteration.
Resume rebuilds the exact pool state by replaying the log; anything not yet
logged never happened.
"""
from __future__ import annotations

import json
import logging
import os
import random
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from . import classifier, metrics, strategies
from .classifier import ClassifierModel, LabeledExample, TrainConfig
from .embedding import EmbeddingStore, embed_word, load_vectors, strategy_vector
from .labels import MENTAL, PHYSICAL, label_name, parse_label
from .lexicon import Lexicon, parse_gloss_lexicon
from .metrics import IterationReport, SessionReport
from .strategies import PoolView, StrategyKind

log = logging.getLogger(__name__)

CONFIG_FILE = "config"
POOL_FILE = "pool"
LOG_FILE = "annotations.log"
METRICS_FILE = "metrics.jsonl"
REPORT_FILE = "report"

COLLECTING = "collecting"
TRAINING = "training"
FINISHED = "finished"


class SessionError(RuntimeError):
    """Session-level failure (bad state transition, integrity violation)."""


class AnnotationConflict(SessionError):
    """A label arrived for a word that is not the current task."""


class OracleError(SessionError):
    """The label source could not produce a label."""


def wall_clock() -> str:
    return datetime.now(timezone.utc).isoformat()


class LogicalClock:
    """Deterministic clock for simulated sessions: epoch + n seconds."""

    def __init__(self, start: int = 0):
        self.counter = start

    def __call__(self) -> str:
        stamp = datetime.fromtimestamp(self.counter, tz=timezone.utc).isoformat()
        self.counter += 1
        return stamp


@dataclass
class IterationConfig:
    """Loop shape: iteration count, per-class quotas and the annotation cap."""

    iterations: int = 5
    pos_quota: int = 20
    neg_quota: int = 20
    cap: int = 120
    strategy: StrategyKind = field(default_factory=lambda: StrategyKind("entropy"))
    seed: int = 0
    warm_start: bool = False
    train: TrainConfig = field(default_factory=TrainConfig)
    annotator: str = "anonymous"

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.pos_quota < 1 or self.neg_quota < 1:
            raise ValueError("quotas must be >= 1")
        if self.pos_quota + self.neg_quota > self.cap:
            raise ValueError("pos_quota + neg_quota must not exceed cap")


@dataclass(frozen=True)
class LabeledWord:
    word: str
    label: int
    iteration: int


@dataclass(frozen=True)
class SessionRecord:
    iteration: int
    word: str
    label: int
    strategy: str
    counted: bool
    timestamp: str
    annotator: str
    note: str | None = None

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "iteration": self.iteration,
                "word": self.word,
                "label": label_name(self.label),
                "strategy": self.strategy,
                "counted": self.counted,
                "timestamp": self.timestamp,
                "annotator": self.annotator,
                "note": self.note,
            },
            sort_keys=True,
        )

    @classmethod
    def from_dict(cls, d: dict) -> "SessionRecord":
        return cls(
            iteration=d["iteration"],
            word=d["word"],
            label=parse_label(d["label"]),
            strategy=d["strategy"],
            counted=d["counted"],
            timestamp=d["timestamp"],
            annotator=d["annotator"],
            note=d.get("note"),
        )


@dataclass
class PoolState:
    unlabeled: list[str]
    labeled: list[LabeledWord] = field(default_factory=list)
    current_pos: list[LabeledWord] = field(default_factory=list)
    current_neg: list[LabeledWord] = field(default_factory=list)
    archive: list[SessionRecord] = field(default_factory=list)
    iteration: int = 0
    annotations_this_iteration: int = 0

    def snapshot(self) -> dict:
        """Comparable view for resume-exactness checks."""
        return {
            "unlabeled": list(self.unlabeled),
            "labeled": [(w.word, w.label, w.iteration) for w in self.labeled],
            "current_pos": [(w.word, w.label) for w in self.current_pos],
            "current_neg": [(w.word, w.label) for w in self.current_neg],
            "archive": [r.to_json_line() for r in self.archive],
            "iteration": self.iteration,
            "annotations_this_iteration": self.annotations_this_iteration,
        }


@dataclass(frozen=True)
class CompletedIteration:
    iteration: int
    annotations: int
    pos_filled: int
    neg_filled: int
    quotas_met: bool
    labeled_total: int


@dataclass(frozen=True)
class AnnotationTask:
    word: str
    glosses: tuple[str, ...]
    iteration: int
    strategy: str
    pos_filled: int
    pos_quota: int
    neg_filled: int
    neg_quota: int
    annotated: int
    cap: int
    session_id: str


@dataclass(frozen=True)
class SubmitResult:
    word: str
    counted: bool
    iteration_complete: bool


class TruthOracle:
    """Simulated annotator backed by a word -> label map (total over the pool)."""

    def __init__(self, truth: Mapping[str, int]):
        self.truth = dict(truth)

    def label(self, word: str) -> int:
        try:
            return self.truth[word]
        except KeyError:
            raise OracleError(f"truth map has no label for {word!r}") from None


@dataclass
class SessionResources:
    """Loaded lexical resources plus precomputed pool encodings."""

    lexicon: Lexicon
    store: EmbeddingStore
    features: dict[str, np.ndarray]
    strategy_vectors: dict[str, np.ndarray]
    testset: list[LabeledExample] | None = None


def build_resources(
    lexicon: Lexicon,
    store: EmbeddingStore,
    pool_words: Sequence[str],
    testset_labels: Mapping[str, int] | None = None,
) -> SessionResources:
    """Precompute both encodings for the pool (and testset) up front."""
    missing = [w for w in pool_words if w not in lexicon]
    if missing:
        raise SessionError(
            f"{len(missing)} pool words missing from lexicon, e.g. {missing[:5]}"
        )
    features = {}
    strat_vecs = {}
    coverages = []
    for word in pool_words:
        emb = embed_word(word, lexicon, store)
        features[word] = emb.values
        strat_vecs[word] = strategy_vector(word, lexicon, store)
        coverages.append(emb.coverage)
    if coverages:
        log.info("mean gloss coverage over pool: %.2f", sum(coverages) / len(coverages))

    testset = None
    if testset_labels is not None:
        missing = [w for w in testset_labels if w not in lexicon]
        if missing:
            raise SessionError(
                f"{len(missing)} testset words missing from lexicon, e.g. {missing[:5]}"
            )
        testset = [
            LabeledExample(word=w, features=embed_word(w, lexicon, store).values, label=lab)
            for w, lab in testset_labels.items()
        ]
    return SessionResources(
        lexicon=lexicon,
        store=store,
        features=features,
        strategy_vectors=strat_vecs,
        testset=testset,
    )


def _train_seed(seed: int, iteration: int) -> int:
    return seed * 100003 + iteration


# --- on-disk layout -----------------------------------------------------------


class SessionStore:
    """Files of one session directory."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    @property
    def config_path(self) -> Path:
        return self.directory / CONFIG_FILE

    @property
    def pool_path(self) -> Path:
        return self.directory / POOL_FILE

    @property
    def log_path(self) -> Path:
        return self.directory / LOG_FILE

    @property
    def metrics_path(self) -> Path:
        return self.directory / METRICS_FILE

    @property
    def report_path(self) -> Path:
        return self.directory / REPORT_FILE

    def checkpoint_path(self, iteration: int) -> Path:
        return self.directory / f"model_{iteration:03d}.ckpt"

    def exists(self) -> bool:
        return self.config_path.exists()

    def write_config(self, values: Mapping[str, object]) -> None:
        lines = [f"{key} = {values[key]}" for key in sorted(values)]
        self.config_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    def read_config(self) -> dict[str, str]:
        values: dict[str, str] = {}
        for line in self.config_path.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise SessionError(f"bad config line {line!r} in {self.config_path}")
            values[key.strip()] = value.strip()
        return values

    def write_pool(self, words: Sequence[str]) -> None:
        self.pool_path.write_text("\n".join(words) + "\n", encoding="utf-8")

    def read_pool(self) -> list[str]:
        return [
            w.strip()
            for w in self.pool_path.read_text(encoding="utf-8").splitlines()
            if w.strip()
        ]

    def append_record(self, record: SessionRecord) -> None:
        """Durable append: the record is flushed and fsynced before return."""
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(record.to_json_line() + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def read_records(self) -> tuple[list[SessionRecord], int | None]:
        """All valid leading records, plus the byte offset of a corrupt tail."""
        records: list[SessionRecord] = []
        if not self.log_path.exists():
            return records, None
        offset = 0
        with open(self.log_path, "rb") as fh:
            for raw in fh:
                line = raw.decode("utf-8", errors="replace").strip()
                if not raw.endswith(b"\n"):
                    return records, offset  # torn final line
                if line:
                    try:
                        records.append(SessionRecord.from_dict(json.loads(line)))
                    except (json.JSONDecodeError, KeyError, ValueError):
                        return records, offset
                offset += len(raw)
        return records, None

    def truncate_log(self, offset: int) -> None:
        with open(self.log_path, "r+b") as fh:
            fh.truncate(offset)

    def append_metrics_row(self, row: IterationReport) -> None:
        payload = {
            "iteration": row.iteration,
            "annotations": row.annotations,
            "labeled_total": row.labeled_total,
            "pos_filled": row.pos_filled,
            "neg_filled": row.neg_filled,
            "quotas_met": row.quotas_met,
            "dev_accuracy": row.dev_accuracy,
            "mental": metrics._metrics_dict(row.mental),
            "physical": metrics._metrics_dict(row.physical),
        }
        with open(self.metrics_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(payload, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def read_metrics_rows(self) -> list[IterationReport]:
        rows: list[IterationReport] = []
        if not self.metrics_path.exists():
            return rows
        for line in self.metrics_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            d = json.loads(line)
            rows.append(
                IterationReport(
                    iteration=d["iteration"],
                    annotations=d["annotations"],
                    labeled_total=d["labeled_total"],
                    pos_filled=d["pos_filled"],
                    neg_filled=d["neg_filled"],
                    quotas_met=d["quotas_met"],
                    dev_accuracy=d["dev_accuracy"],
                    mental=metrics._metrics_from(d.get("mental")),
                    physical=metrics._metrics_from(d.get("physical")),
                )
            )
        return rows

    def rewrite_metrics(self, rows: Sequence[IterationReport]) -> None:
        if self.metrics_path.exists():
            self.metrics_path.unlink()
        for row in rows:
            self.append_metrics_row(row)


# --- config (de)serialization --------------------------------------------------


def _config_to_mapping(
    cfg: IterationConfig,
    lexicon_path: Path,
    vectors_path: Path,
    testset_path: Path | None,
    clock_kind: str,
) -> dict[str, object]:
    values: dict[str, object] = {
        "format_version": 1,
        "strategy": cfg.strategy.name,
        "cal_k": cfg.strategy.cal_k,
        "seed": cfg.seed,
        "iterations": cfg.iterations,
        "pos_quota": cfg.pos_quota,
        "neg_quota": cfg.neg_quota,
        "cap": cfg.cap,
        "warm_start": cfg.warm_start,
        "annotator": cfg.annotator,
        "clock": clock_kind,
        "lexicon_path": lexicon_path,
        "vectors_path": vectors_path,
        "epochs": cfg.train.epochs,
        "lr": repr(cfg.train.lr),
        "lr_drop_epoch": cfg.train.lr_drop_epoch,
        "lr_drop_factor": repr(cfg.train.lr_drop_factor),
        "batch_size": cfg.train.batch_size,
        "weight_decay": repr(cfg.train.weight_decay),
        "dev_fraction": repr(cfg.train.dev_fraction),
        "hidden_dim": cfg.train.hidden_dim,
        "dropout_prob": repr(cfg.train.dropout_prob),
    }
    if testset_path is not None:
        values["testset_path"] = testset_path
    return values


def _config_from_mapping(values: Mapping[str, str]) -> tuple[IterationConfig, dict]:
    def flag(key: str) -> bool:
        return values[key].lower() in ("true", "1", "yes")

    cfg = IterationConfig(
        iterations=int(values["iterations"]),
        pos_quota=int(values["pos_quota"]),
        neg_quota=int(values["neg_quota"]),
        cap=int(values["cap"]),
        strategy=StrategyKind(values["strategy"], cal_k=int(values["cal_k"])),
        seed=int(values["seed"]),
        warm_start=flag("warm_start"),
        annotator=values.get("annotator", "anonymous"),
        train=TrainConfig(
            epochs=int(values["epochs"]),
            lr=float(values["lr"]),
            lr_drop_epoch=int(values["lr_drop_epoch"]),
            lr_drop_factor=float(values["lr_drop_factor"]),
            batch_size=int(values["batch_size"]),
            weight_decay=float(values["weight_decay"]),
            dev_fraction=float(values["dev_fraction"]),
            hidden_dim=int(values["hidden_dim"]),
            dropout_prob=float(values["dropout_prob"]),
        ),
    )
    aux = {
        "lexicon_path": values["lexicon_path"],
        "vectors_path": values["vectors_path"],
        "testset_path": values.get("testset_path"),
        "clock": values.get("clock", "wall"),
    }
    return cfg, aux


# --- the session ---------------------------------------------------------------


class ActiveSession:
    """One live acquisition loop owning its pool state and session directory.

    All state mutation funnels through an internal lock; a task may be
    computed while a label is pending, but submissions are strictly serial.
    """

    def __init__(
        self,
        store: SessionStore,
        cfg: IterationConfig,
        resources: SessionResources,
        pool_words: Sequence[str],
        clock: Callable[[], str],
        clock_kind: str,
    ):
        self.store = store
        self.cfg = cfg
        self.resources = resources
        self.clock = clock
        self.clock_kind = clock_kind
        self.session_id = store.directory.name
        self.initial_pool_size = len(pool_words)
        self.state = PoolState(unlabeled=list(pool_words))
        self.models: dict[int, ClassifierModel] = {}
        self.completed: list[CompletedIteration] = []
        self.metrics_rows: list[IterationReport] = []
        self._archived_words: set[str] = set()
        self._task: AnnotationTask | None = None
        self._status = COLLECTING
        self._lock = threading.RLock()

    # -- construction

    @classmethod
    def create(
        cls,
        directory: str | Path,
        pool_words: Sequence[str],
        cfg: IterationConfig,
        lexicon_path: str | Path,
        vectors_path: str | Path,
        testset_path: str | Path | None = None,
        clock_kind: str = "wall",
    ) -> "ActiveSession":
        store = SessionStore(directory)
        if store.exists() or store.log_path.exists():
            raise SessionError(f"session already exists at {store.directory}")
        if not pool_words:
            raise SessionError("initial pool must be non-empty")
        if len(set(pool_words)) != len(pool_words):
            raise SessionError("pool contains duplicate words")
        store.directory.mkdir(parents=True, exist_ok=True)

        lexicon_path = Path(lexicon_path).resolve()
        vectors_path = Path(vectors_path).resolve()
        testset_path = Path(testset_path).resolve() if testset_path else None
        resources = _load_resources(lexicon_path, vectors_path, pool_words, testset_path)

        store.write_pool(pool_words)
        store.write_config(
            _config_to_mapping(cfg, lexicon_path, vectors_path, testset_path, clock_kind)
        )
        clock = LogicalClock() if clock_kind == "sim" else wall_clock
        return cls(store, cfg, resources, pool_words, clock, clock_kind)

    @classmethod
    def open(cls, directory: str | Path) -> "ActiveSession":
        """Resume from disk by replaying the annotation log."""
        store = SessionStore(directory)
        if not store.exists():
            raise SessionError(f"no session at {store.directory}")
        cfg, aux = _config_from_mapping(store.read_config())
        pool_words = store.read_pool()
        resources = _load_resources(
            Path(aux["lexicon_path"]),
            Path(aux["vectors_path"]),
            pool_words,
            Path(aux["testset_path"]) if aux["testset_path"] else None,
        )

        records, corrupt_at = store.read_records()
        if corrupt_at is not None:
            log.warning(
                "%s: corrupt record at byte %d; resuming with %d valid records "
                "and truncating the tail",
                store.log_path,
                corrupt_at,
                len(records),
            )
            store.truncate_log(corrupt_at)

        clock_kind = aux["clock"]
        clock = LogicalClock(len(records)) if clock_kind == "sim" else wall_clock
        session = cls(store, cfg, resources, pool_words, clock, clock_kind)
        for record in records:
            session._apply(record, replay=True)
            session._close_iteration_if_done()
        session._restore_models()
        session._refresh_status()
        return session

    # -- properties

    @property
    def status(self) -> str:
        return self._status

    @property
    def latest_model(self) -> ClassifierModel | None:
        if not self.models:
            return None
        return self.models[max(self.models)]

    def progress(self) -> dict:
        return {
            "pos_filled": len(self.state.current_pos),
            "pos_quota": self.cfg.pos_quota,
            "neg_filled": len(self.state.current_neg),
            "neg_quota": self.cfg.neg_quota,
            "annotated": self.state.annotations_this_iteration,
            "cap": self.cfg.cap,
        }

    # -- selection

    def current_task(self) -> AnnotationTask:
        """The word awaiting a label; stable until that label arrives."""
        with self._lock:
            if self._status != COLLECTING:
                raise SessionError(f"no annotation task while session is {self._status}")
            if self._task is None:
                word, used = self._pick()
                entry = self.resources.lexicon[word]
                self._task = AnnotationTask(
                    word=word,
                    glosses=tuple(text for _, text in entry.glosses),
                    iteration=self.state.iteration,
                    strategy=used,
                    session_id=self.session_id,
                    annotated=self.state.annotations_this_iteration,
                    pos_filled=len(self.state.current_pos),
                    pos_quota=self.cfg.pos_quota,
                    neg_filled=len(self.state.current_neg),
                    neg_quota=self.cfg.neg_quota,
                    cap=self.cfg.cap,
                )
            return self._task

    def _view(self) -> PoolView:
        return PoolView(
            unlabeled=tuple(self.state.unlabeled),
            labeled=tuple(lw.word for lw in self.state.labeled),
            features=self.resources.features,
            strategy_vectors=self.resources.strategy_vectors,
            model=self.latest_model,
            labels={lw.word: lw.label for lw in self.state.labeled},
        )

    def _pick(self) -> tuple[str, str]:
        """Random on the first iteration, the configured strategy afterwards.

        Random draws are seeded per annotation index so a resumed session
        recomputes the identical pick.
        """
        view = self._view()
        if self.state.iteration == 0 or self.cfg.strategy.name == "random":
            rng = random.Random(f"{self.cfg.seed}:pick:{len(self.state.archive)}")
            return strategies.select_random(view, rng), "random"
        word = strategies.select(self.cfg.strategy, view, random.Random(0))
        return word, self.cfg.strategy.name

    # -- annotation

    def submit(
        self,
        word: str,
        label: int,
        note: str | None = None,
        annotator: str | None = None,
    ) -> SubmitResult:
        """Record one label: durable log append, then pool bookkeeping."""
        with self._lock:
            if self._status != COLLECTING:
                raise SessionError(f"cannot accept labels while session is {self._status}")
            if label not in (MENTAL, PHYSICAL):
                raise ValueError(f"label must be MENTAL or PHYSICAL, got {label!r}")
            if word in self._archived_words:
                raise AnnotationConflict(f"{word!r} was already annotated")
            task = self.current_task()
            if word != task.word:
                raise AnnotationConflict(
                    f"current task is {task.word!r}, not {word!r}"
                )
            counted = self._would_count(label)
            record = SessionRecord(
                iteration=self.state.iteration,
                word=word,
                label=label,
                strategy=task.strategy,
                counted=counted,
                timestamp=self.clock(),
                annotator=annotator or self.cfg.annotator,
                note=note,
            )
            self.store.append_record(record)
            self._apply(record)
            complete = self._close_iteration_if_done()
            return SubmitResult(word=word, counted=counted, iteration_complete=complete)

    def _would_count(self, label: int) -> bool:
        if label == MENTAL:
            return len(self.state.current_pos) < self.cfg.pos_quota
        return len(self.state.current_neg) < self.cfg.neg_quota

    def _apply(self, record: SessionRecord, replay: bool = False) -> None:
        """One bookkeeping step, shared between live submission and replay."""
        state = self.state
        if replay:
            if state.iteration >= self.cfg.iterations:
                raise SessionError("log contains records beyond the final iteration")
            if record.iteration != state.iteration:
                raise SessionError(
                    f"log record for iteration {record.iteration} arrived during "
                    f"iteration {state.iteration}"
                )
            if record.counted != self._would_count(record.label):
                raise SessionError(f"log inconsistency: counted flag mismatch at {record.word!r}")
        try:
            state.unlabeled.remove(record.word)
        except ValueError:
            raise SessionError(f"{record.word!r} is not in the unlabeled pool") from None
        state.annotations_this_iteration += 1
        state.archive.append(record)
        self._archived_words.add(record.word)
        if record.counted:
            entry = LabeledWord(record.word, record.label, state.iteration)
            if record.label == MENTAL:
                state.current_pos.append(entry)
            else:
                state.current_neg.append(entry)
        self._task = None
        if len(state.unlabeled) + len(self._archived_words) != self.initial_pool_size:
            raise SessionError("pool conservation violated")

    def _iteration_done(self) -> bool:
        state = self.state
        quotas = (
            len(state.current_pos) == self.cfg.pos_quota
            and len(state.current_neg) == self.cfg.neg_quota
        )
        return (
            quotas
            or state.annotations_this_iteration == self.cfg.cap
            or not state.unlabeled
        )

    def _close_iteration_if_done(self) -> bool:
        """Merge buffers into the labeled pool and advance; training stays pending."""
        if not self._iteration_done():
            return False
        state = self.state
        quotas_met = (
            len(state.current_pos) == self.cfg.pos_quota
            and len(state.current_neg) == self.cfg.neg_quota
        )
        if not quotas_met:
            log.warning(
                "iteration %d closed short of quotas (%d/%d pos, %d/%d neg, %d annotated)",
                state.iteration,
                len(state.current_pos),
                self.cfg.pos_quota,
                len(state.current_neg),
                self.cfg.neg_quota,
                state.annotations_this_iteration,
            )
        state.labeled.extend(state.current_pos)
        state.labeled.extend(state.current_neg)
        self.completed.append(
            CompletedIteration(
                iteration=state.iteration,
                annotations=state.annotations_this_iteration,
                pos_filled=len(state.current_pos),
                neg_filled=len(state.current_neg),
                quotas_met=quotas_met,
                labeled_total=len(state.labeled),
            )
        )
        state.current_pos = []
        state.current_neg = []
        state.annotations_this_iteration = 0
        state.iteration += 1
        self._status = TRAINING
        return True

    # -- training

    def _labeled_through(self, iteration: int) -> list[LabeledExample]:
        return [
            LabeledExample(lw.word, self.resources.features[lw.word], lw.label)
            for lw in self.state.labeled
            if lw.iteration <= iteration
        ]

    def _train_one(self, done: CompletedIteration) -> IterationReport:
        t = done.iteration
        data = self._labeled_through(t)
        if not data:
            raise SessionError(f"iteration {t} closed with no counted labels; cannot train")
        train_cfg = replace(self.cfg.train, seed=_train_seed(self.cfg.seed, t))
        warm = self.models.get(t - 1) if self.cfg.warm_start else None
        winner, history = classifier.train(data, train_cfg, warm_from=warm)
        self.models[t] = winner
        classifier.save_model(winner, self.store.checkpoint_path(t))

        mental = physical = None
        dev_acc = history.epochs[history.best_epoch].dev_accuracy
        if self.resources.testset:
            result = metrics.evaluate(winner, self.resources.testset)
            mental, physical = result["mental"], result["physical"]
        row = IterationReport(
            iteration=t,
            annotations=done.annotations,
            labeled_total=done.labeled_total,
            pos_filled=done.pos_filled,
            neg_filled=done.neg_filled,
            quotas_met=done.quotas_met,
            dev_accuracy=dev_acc,
            mental=mental,
            physical=physical,
        )
        self.metrics_rows.append(row)
        self.store.append_metrics_row(row)
        return row

    def train_pending_iteration(self) -> list[IterationReport]:
        """Retrain for every completed-but-untrained iteration, oldest first."""
        with self._lock:
            rows = []
            for done in self.completed:
                if done.iteration not in self.models:
                    rows.append(self._train_one(done))
            self._refresh_status()
            return rows

    def _restore_models(self) -> None:
        """Load the longest consistent prefix of checkpoint + metrics pairs.

        Anything after the first missing piece is treated as untrained and
        rebuilt lazily by train_pending_iteration; deterministic training
        reproduces identical checkpoints, so nothing is lost.
        """
        rows = {row.iteration: row for row in self.store.read_metrics_rows()}
        kept: list[IterationReport] = []
        for done in self.completed:
            path = self.store.checkpoint_path(done.iteration)
            if not path.exists() or done.iteration not in rows:
                break
            self.models[done.iteration] = classifier.load_model(path)
            kept.append(rows[done.iteration])
        self.metrics_rows = kept
        if len(kept) != len(rows):
            self.store.rewrite_metrics(kept)

    def _refresh_status(self) -> None:
        pending = any(done.iteration not in self.models for done in self.completed)
        if pending:
            self._status = TRAINING
        elif self.state.iteration >= self.cfg.iterations or not self.state.unlabeled:
            self._status = FINISHED
        else:
            self._status = COLLECTING

    # -- reporting

    def best_iteration(self) -> int | None:
        """Iteration whose winner has the best testset macro-F1 (ties earlier)."""
        scored = [
            (0.5 * (row.mental.f1 + row.physical.f1), row.iteration)
            for row in self.metrics_rows
            if row.mental is not None and row.physical is not None
        ]
        if not scored:
            return None
        best_score = max(score for score, _ in scored)
        return min(it for score, it in scored if score == best_score)

    def final_model(self) -> ClassifierModel | None:
        best = self.best_iteration()
        if best is not None:
            return self.models[best]
        return self.latest_model

    def report(self) -> SessionReport:
        return SessionReport(
            strategy=self.cfg.strategy.name,
            seed=self.cfg.seed,
            pool_initial=self.initial_pool_size,
            pool_remaining=len(self.state.unlabeled),
            iterations=list(self.metrics_rows),
            best_iteration=self.best_iteration(),
        )

    def export_rows(self) -> list[dict]:
        """Every annotation ever made: word, label, iteration, counted flag."""
        return [
            {
                "word": r.word,
                "label": label_name(r.label),
                "iteration": r.iteration,
                "counted": r.counted,
            }
            for r in self.state.archive
        ]


def _load_resources(
    lexicon_path: Path,
    vectors_path: Path,
    pool_words: Sequence[str],
    testset_path: Path | None,
) -> SessionResources:
    from .labels import load_label_file

    lexicon = parse_gloss_lexicon(lexicon_path)
    store = load_vectors(vectors_path)
    testset_labels = load_label_file(testset_path) if testset_path else None
    return build_resources(lexicon, store, pool_words, testset_labels)


# --- batch driving ---------------------------------------------------------------


def run_iteration(session: ActiveSession, oracle: TruthOracle) -> int:
    """Drive one full iteration with a programmatic oracle; returns the number
    of words annotated."""
    if session.status == TRAINING:
        session.train_pending_iteration()
    if session.status == FINISHED:
        raise SessionError("session already finished")
    while session.status == COLLECTING:
        task = session.current_task()
        session.submit(task.word, oracle.label(task.word))
    annotated = session.completed[-1].annotations
    session.train_pending_iteration()
    return annotated


def run_session(session: ActiveSession, oracle: TruthOracle) -> SessionReport:
    """Run iterations until the session finishes; writes the final report file."""
    while session.status != FINISHED:
        run_iteration(session, oracle)
    report = session.report()
    session.store.report_path.write_text(
        metrics.render_session_records(report), encoding="utf-8"
    )
    return report
