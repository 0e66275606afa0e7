"""Command-line interface: corpus ingest, batch simulated runs, the HTTP
annotation service, evaluation, and the sentiment-lexicon cross-tab.

Every option resolves CLI flag > LEXLOOP_<NAME> environment variable >
`--config` file (key = value lines) > built-in default.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from types import SimpleNamespace

from . import metrics
from .classifier import LabeledExample, TrainConfig, load_model
from .embedding import embed_word, load_vectors
from .engine import (
    ActiveSession,
    IterationConfig,
    SessionError,
    SessionStore,
    TruthOracle,
    run_session,
)
from .labels import load_label_file
from .lexicon import (
    NotInLexicon,
    ParseError,
    extract_adjectives,
    parse_gloss_lexicon,
    parse_sentiwordnet,
)
from .senticompare import (
    classify_words,
    cross_tab,
    render_cross_tab_records,
    render_cross_tab_table,
)
from .strategies import VALID_STRATEGIES, StrategyKind

ENV_PREFIX = "LEXLOOP_"
FORMATS = ("table", "records")


def _as_bool(text: str) -> bool:
    return str(text).strip().lower() in ("true", "1", "yes", "on")


def _read_config_file(path: str) -> dict[str, str]:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for line in p.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"bad config line {line!r} in {path}")
        values[key.strip()] = value.strip()
    return values


def _resolve_options(args: argparse.Namespace, spec: dict) -> SimpleNamespace:
    """Merge CLI > environment > config file > default for every option."""
    config_path = getattr(args, "config", None) or os.environ.get(ENV_PREFIX + "CONFIG")
    config = _read_config_file(config_path) if config_path else {}
    resolved = {}
    missing = []
    for name, (cast, default, required) in spec.items():
        value = getattr(args, name, None)
        if value is None:
            env = os.environ.get(ENV_PREFIX + name.upper())
            if env is not None:
                value = env
            elif name in config:
                value = config[name]
            else:
                value = default
        if isinstance(value, str) and cast is not str:
            value = cast(value)
        if required and value is None:
            missing.append(name)
        resolved[name] = value
    if missing:
        raise ValueError(
            "missing required option(s): " + ", ".join(f"--{m.replace('_', '-')}" for m in missing)
        )
    return SimpleNamespace(**resolved)


def _require_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"{what} file not found: {path}")
    return p


def _check_format(fmt: str) -> str:
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}: expected one of {', '.join(FORMATS)}")
    return fmt


_PATH_OPTS = {
    "lexicon": (str, None, True),
    "vectors": (str, None, True),
}

_LOOP_OPTS = {
    "strategy": (str, "entropy", False),
    "cal_k": (int, 10, False),
    "iterations": (int, 5, False),
    "pos_quota": (int, 20, False),
    "neg_quota": (int, 20, False),
    "cap": (int, 120, False),
    "warm_start": (_as_bool, False, False),
    "epochs": (int, 20, False),
    "lr": (float, 0.1, False),
    "lr_drop_epoch": (int, 10, False),
    "lr_drop_factor": (float, 10.0, False),
    "batch_size": (int, 32, False),
    "weight_decay": (float, 0.001, False),
    "dev_fraction": (float, 0.2, False),
    "hidden_dim": (int, 0, False),
    "dropout_prob": (float, 0.3, False),
}


def _iteration_config(opt: SimpleNamespace, seed: int) -> IterationConfig:
    return IterationConfig(
        iterations=opt.iterations,
        pos_quota=opt.pos_quota,
        neg_quota=opt.neg_quota,
        cap=opt.cap,
        strategy=StrategyKind(opt.strategy, cal_k=opt.cal_k),
        seed=seed,
        warm_start=opt.warm_start,
        train=TrainConfig(
            epochs=opt.epochs,
            lr=opt.lr,
            lr_drop_epoch=opt.lr_drop_epoch,
            lr_drop_factor=opt.lr_drop_factor,
            batch_size=opt.batch_size,
            weight_decay=opt.weight_decay,
            dev_fraction=opt.dev_fraction,
            hidden_dim=opt.hidden_dim,
            dropout_prob=opt.dropout_prob,
        ),
    )


def _load_testset(testset_path: str, lexicon_path: str, vectors_path: str) -> list[LabeledExample]:
    labels = load_label_file(_require_file(testset_path, "testset"))
    lexicon = parse_gloss_lexicon(_require_file(lexicon_path, "lexicon"))
    store = load_vectors(_require_file(vectors_path, "vectors"))
    return [
        LabeledExample(word, embed_word(word, lexicon, store).values, label)
        for word, label in labels.items()
    ]


# --- subcommands ------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    opt = _resolve_options(
        args,
        {
            "corpus": (str, None, True),
            "lexicon": (str, None, True),
            "out": (str, None, True),
        },
    )
    lexicon = parse_gloss_lexicon(_require_file(opt.lexicon, "lexicon"))
    words = extract_adjectives(_require_file(opt.corpus, "corpus"), lexicon)
    out = Path(opt.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(words) + "\n" if words else "", encoding="utf-8")
    print(f"{len(words)} candidate words -> {out}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    opt = _resolve_options(
        args,
        {
            **_PATH_OPTS,
            **_LOOP_OPTS,
            "oracle": (str, None, True),
            "pool": (str, None, False),
            "testset": (str, None, False),
            "out": (str, None, True),
            "seed": (int, 0, False),
            "seeds": (int, 3, False),
            "format": (str, "table", False),
        },
    )
    _check_format(opt.format)
    truth = load_label_file(_require_file(opt.oracle, "oracle truth"))
    if opt.pool:
        pool = [
            w.strip()
            for w in _require_file(opt.pool, "pool").read_text(encoding="utf-8").splitlines()
            if w.strip()
        ]
    else:
        pool = sorted(truth)
    _require_file(opt.lexicon, "lexicon")
    _require_file(opt.vectors, "vectors")
    if opt.testset:
        _require_file(opt.testset, "testset")

    reports = []
    for i in range(opt.seeds):
        seed = opt.seed + i
        session_dir = Path(opt.out) / f"{opt.strategy}-seed{seed}"
        session = ActiveSession.create(
            session_dir,
            pool,
            _iteration_config(opt, seed),
            opt.lexicon,
            opt.vectors,
            testset_path=opt.testset,
            clock_kind="sim",
        )
        report = run_session(session, TruthOracle(truth))
        reports.append(report)
        print(f"seed {seed}: session written to {session_dir}", file=sys.stderr)

    if len(reports) == 1:
        text = (
            metrics.render_session_table(reports[0])
            if opt.format == "table"
            else metrics.render_session_records(reports[0])
        )
    else:
        agg = metrics.aggregate_runs(reports)
        text = (
            metrics.render_aggregate_table(agg)
            if opt.format == "table"
            else metrics.render_aggregate_records(agg)
        )
    print(text)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    opt = _resolve_options(
        args,
        {
            **_LOOP_OPTS,
            "session": (str, None, True),
            "addr": (str, "127.0.0.1:8000", False),
            "ui": (str, None, False),
            "cors": (str, "*", False),
            "lexicon": (str, None, False),
            "vectors": (str, None, False),
            "pool": (str, None, False),
            "testset": (str, None, False),
            "seed": (int, 0, False),
        },
    )
    store = SessionStore(opt.session)
    if store.exists():
        session = ActiveSession.open(opt.session)
    else:
        if not (opt.pool and opt.lexicon and opt.vectors):
            raise ValueError(
                f"no session at {opt.session}; creating one needs --pool, --lexicon and --vectors"
            )
        pool = [
            w.strip()
            for w in _require_file(opt.pool, "pool").read_text(encoding="utf-8").splitlines()
            if w.strip()
        ]
        session = ActiveSession.create(
            opt.session,
            pool,
            _iteration_config(opt, opt.seed),
            _require_file(opt.lexicon, "lexicon"),
            _require_file(opt.vectors, "vectors"),
            testset_path=opt.testset,
        )

    host, _, port = opt.addr.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"--addr must look like HOST:PORT, got {opt.addr!r}")

    from .server import create_app

    app = create_app(
        session,
        ui_dir=opt.ui,
        cors_origins=tuple(o.strip() for o in opt.cors.split(",") if o.strip()),
    )
    import uvicorn

    uvicorn.run(app, host=host, port=int(port), log_level="info")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    opt = _resolve_options(
        args,
        {
            **_PATH_OPTS,
            "model": (str, None, True),
            "testset": (str, None, True),
            "format": (str, "table", False),
        },
    )
    _check_format(opt.format)
    model = load_model(_require_file(opt.model, "model"))
    testset = _load_testset(opt.testset, opt.lexicon, opt.vectors)
    result = metrics.evaluate(model, testset)
    counts = result["counts"]
    if opt.format == "records":
        import json

        print(
            json.dumps(
                {
                    "kind": "confusion",
                    "tp": counts.tp,
                    "fp": counts.fp,
                    "fn": counts.fn,
                    "tn": counts.tn,
                },
                sort_keys=True,
            )
        )
        for name in ("mental", "physical"):
            m = result[name]
            print(
                json.dumps(
                    {
                        "kind": "class_metrics",
                        "class": name,
                        "precision": m.precision,
                        "recall": m.recall,
                        "f1": m.f1,
                        "degenerate": m.degenerate,
                    },
                    sort_keys=True,
                )
            )
    else:
        print(f"tp={counts.tp} fp={counts.fp} fn={counts.fn} tn={counts.tn} total={counts.total}")
        print("class     precision  recall    f1")
        for name in ("mental", "physical"):
            m = result[name]
            print(f"{name:<9} {m.precision:9.2f} {m.recall:7.2f} {m.f1:5.2f}")
    return 0


def cmd_senticompare(args: argparse.Namespace) -> int:
    opt = _resolve_options(
        args,
        {
            "mpc": (str, None, True),
            "swn": (str, None, True),
            "format": (str, "table", False),
        },
    )
    _check_format(opt.format)
    labels = load_label_file(_require_file(opt.mpc, "tag map"))
    synsets = parse_sentiwordnet(_require_file(opt.swn, "sentiment lexicon"))
    tab = cross_tab(labels, classify_words(synsets))
    print(render_cross_tab_table(tab) if opt.format == "table" else render_cross_tab_records(tab))
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    opt = _resolve_options(
        args,
        {
            "session": (str, None, True),
            "format": (str, "table", False),
        },
    )
    _check_format(opt.format)
    session = ActiveSession.open(opt.session)
    rows = session.export_rows()
    if opt.format == "records":
        import json

        for row in rows:
            print(json.dumps(row, sort_keys=True))
    else:
        print("word                  label     iteration  counted")
        for row in rows:
            print(
                f"{row['word']:<21} {row['label']:<9} {row['iteration']:9d}  "
                f"{'yes' if row['counted'] else 'no'}"
            )
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexloop",
        description="Active-learning workbench for mental/physical word classification.",
    )
    parser.add_argument("--config", help="key = value option file")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=FORMATS, help="output format")

    p = sub.add_parser("ingest", help="extract candidate adjectives from a review corpus")
    p.add_argument("--corpus")
    p.add_argument("--lexicon")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("run", help="batch simulated sessions against a truth file")
    p.add_argument("--strategy", choices=VALID_STRATEGIES)
    p.add_argument("--oracle", help="word<TAB>label truth file")
    p.add_argument("--pool", help="newline-delimited pool words (default: truth words)")
    p.add_argument("--lexicon")
    p.add_argument("--vectors")
    p.add_argument("--testset")
    p.add_argument("--out", help="directory for session dirs")
    p.add_argument("--seed", type=int)
    p.add_argument("--seeds", type=int, help="number of seeded repeats")
    for name in _LOOP_OPTS:
        if name != "strategy":
            flag = "--" + name.replace("_", "-")
            p.add_argument(flag, dest=name, type=str)
    add_format(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("serve", help="serve the annotation API for a session directory")
    p.add_argument("--session")
    p.add_argument("--addr")
    p.add_argument("--ui", help="static UI directory to mount at /")
    p.add_argument("--cors", help="comma-separated allowed origins")
    p.add_argument("--strategy", choices=VALID_STRATEGIES)
    p.add_argument("--pool")
    p.add_argument("--lexicon")
    p.add_argument("--vectors")
    p.add_argument("--testset")
    p.add_argument("--seed", type=int)
    for name in _LOOP_OPTS:
        if name != "strategy":
            flag = "--" + name.replace("_", "-")
            p.add_argument(flag, dest=name, type=str)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("eval", help="confusion counts and P/R/F1 for a checkpoint")
    p.add_argument("--model")
    p.add_argument("--testset")
    p.add_argument("--lexicon")
    p.add_argument("--vectors")
    add_format(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("senticompare", help="subjectivity cross-tab against a sentiment lexicon")
    p.add_argument("--mpc", help="word<TAB>label file")
    p.add_argument("--swn", help="sentiment lexicon file")
    add_format(p)
    p.set_defaults(func=cmd_senticompare)

    p = sub.add_parser("export", help="dump every annotation of a session")
    p.add_argument("--session")
    add_format(p)
    p.set_defaults(func=cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ParseError, SessionError, NotInLexicon, ValueError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"lexloop: {message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
