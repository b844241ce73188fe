"""Command-line driver.

Subcommands: grammar, train-stage1, train-stage2, eval, export-dist.
Seeds come from --seed, then the HELMFEP_SEED environment variable, then
the config file.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import checkpoint as ckpt_io
from .active import Stage2Config, salience_init, train_stage2
from .grammar import enumerate_wellformed, wellformed_signs
from .metrics import evaluate
from .network import NetworkShape
from .training import TrainConfig, eval_rng, train_stage1

SEED_ENV = "HELMFEP_SEED"


class CommandError(Exception):
    pass


def _read_config(path, cls, section):
    if path is None:
        return {}
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise CommandError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CommandError(f"config {path} is not valid JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise CommandError(f"config {path} must hold a JSON object")
    if section in raw or any(k in raw for k in ("stage1", "stage2")):
        raw = raw.get(section, {})
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise CommandError(f"config {path}: unknown {section} field(s) {', '.join(unknown)}")
    return raw


def _seed(args, values, fallback=0):
    if args.seed is not None:
        return args.seed
    if os.environ.get(SEED_ENV):
        try:
            return int(os.environ[SEED_ENV])
        except ValueError:
            raise CommandError(f"{SEED_ENV} must be an integer") from None
    return values.get("seed", fallback)


def _build(cls, values, **overrides):
    values = {**values, **{k: v for k, v in overrides.items() if v is not None}}
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise CommandError(f"invalid configuration: {exc}") from None


def _load(path):
    try:
        return ckpt_io.load(path)
    except OSError as exc:
        raise CommandError(f"cannot read checkpoint {path}: {exc.strerror}") from None


def _write(path, text):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CommandError(f"cannot write {path}: {exc.strerror}") from None


def cmd_grammar(args):
    words = enumerate_wellformed()
    _write(args.out, "".join(p.bits + "\n" for p in words))
    print(len(words))


def cmd_train_stage1(args):
    values = _read_config(args.config, TrainConfig, "stage1")
    cfg = _build(TrainConfig, values, seed=_seed(args, values), stage1_iterations=args.iterations,
                 learning_rate=args.learning_rate, update_rule=args.update_rule)
    shape = NetworkShape(tuple(args.shape)) if args.shape else NetworkShape()
    if shape.data_size != 10:
        raise CommandError("the grammar is defined on 10-bit words; the data layer must have 10 units")
    rng = np.random.default_rng(cfg.seed)
    gen, rec, trace = train_stage1(cfg, enumerate_wellformed(), shape, rng)
    ck = ckpt_io.Checkpoint(shape, gen, rec, "stage1" if cfg.stage1_iterations else "init", cfg.seed,
                            cfg.stage1_iterations, 0, rng.bit_generator.state, None,
                            {"stage1": cfg.to_dict()}, {"stage1": trace.to_list()})
    _write(args.out, ck.dumps())
    if trace.records:
        last = trace.records[-1]
        print(f"iteration {last.iteration}: accuracy {last.accuracy:.4f}, free energy {last.free_energy:.4f}")


def cmd_train_stage2(args):
    ck = _load(args.checkpoint)
    if ck.stage != "stage1":
        raise CommandError(f"train-stage2 needs a stage1 checkpoint, got stage {ck.stage!r}")
    values = _read_config(args.config, Stage2Config, "stage2")
    seed = _seed(args, values, ck.seed)
    cfg = _build(Stage2Config, values, seed=seed, rounds=args.rounds)
    # an explicit seed starts a fresh stream; otherwise continue the stage-I stream
    explicit = args.seed is not None or os.environ.get(SEED_ENV) or "seed" in values
    rng = np.random.default_rng(cfg.seed) if explicit else ck.rng()
    gen, rec, dist, trace = train_stage2(ck.gen, ck.rec, enumerate_wellformed(), cfg, rng)
    out = ckpt_io.Checkpoint(ck.shape, gen, rec, "stage2", cfg.seed, ck.iteration, cfg.rounds,
                             rng.bit_generator.state, dist, {**ck.config, "stage2": cfg.to_dict()},
                             {**ck.trace, "stage2": trace.to_list()})
    _write(args.out, out.dumps())
    accs = trace.accuracies()
    if accs:
        print(f"round {cfg.rounds}: accuracy {accs[-1]:.4f}")


def cmd_eval(args):
    ck = _load(args.checkpoint)
    seed = args.seed if args.seed is not None else int(os.environ.get(SEED_ENV) or ck.seed)
    if args.n < 1:
        raise CommandError("--n must be at least 1")
    report = evaluate(ck.gen, ck.rec, wellformed_signs(), args.n, eval_rng(seed, 4),
                      salience=ck.salience)
    body = {"checkpoint_stage": ck.stage, "seed": seed, **report.to_dict()}
    _write(args.report, json.dumps(body, indent=1) + "\n")
    print(f"accuracy {report.accuracy:.4f} over {report.n_samples} dreams, "
          f"{report.distinct_valid} distinct valid patterns")


def cmd_export_dist(args):
    ck = _load(args.checkpoint)
    dist = ck.salience if ck.salience is not None else salience_init(enumerate_wellformed())
    rows = sorted(zip(dist.patterns, dist.weights), key=lambda r: r[0].bits)
    try:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["pattern", "count", "probability"])
            for p, c in rows:
                w.writerow([p.bits, int(c), repr(int(c) / dist.total)])
    except OSError as exc:
        raise CommandError(f"cannot write {args.out}: {exc.strerror}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="helmfep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grammar", help="write the well-formed set, one word per line")
    p.add_argument("out")
    p.set_defaults(func=cmd_grammar)

    p = sub.add_parser("train-stage1", help="wake-sleep training on the well-formed set")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--update-rule", choices=["exact_gradient", "paper_literal"])
    p.add_argument("--shape", type=int, nargs="+", help="layer sizes, data layer first")
    p.set_defaults(func=cmd_train_stage1)

    p = sub.add_parser("train-stage2", help="active-inference fine-tuning of a stage-I checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--rounds", type=int)
    p.set_defaults(func=cmd_train_stage2)

    p = sub.add_parser("eval", help="generation accuracy, diversity and free energy")
    p.add_argument("checkpoint")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--report", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export-dist", help="salience distribution as CSV")
    p.add_argument("checkpoint")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_dist)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (CommandError, ckpt_io.CheckpointError) as exc:
        print(f"helmfep {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
