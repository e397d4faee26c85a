"""Command-line interface.

Subcommands:

    ground       write per-example rule-instance lists and neuron-count stats (CSV)
    train        fit learnable parameters; writes a parameter file and a JSONL report
    predict      score query atoms under a parameter file (CSV)
    xval         k-fold cross-validation with inner grid selection on training risk
    export-dot   write one Graphviz file per example

Exit codes: 0 success, 2 malformed input or bad configuration,
3 recursive template, 4 grounding capacity exceeded.  The environment
variable LRNN_CAPACITY overrides the default ground-atom budget.
All outputs are deterministic functions of the inputs and --seed.
"""

import argparse
import csv
import io
import os
import random
import sys
from pathlib import Path

from .errors import (AllRestartsFailedError, CapacityError, LrnnError, ParseError,
                     RecursiveTemplateError)
from .grounding import DEFAULT_CAPACITY, ground
from .logic import (ParameterStore, QueryRow, Template, parse_examples, parse_queries,
                    parse_template)
from .network import build, export_dot, forward
from .training import (CompiledTask, TrainConfig, TrainingTask, derive_seed, train,
                       zero_one_error)


# ---------------------------------------------------------------------------
# Parameter files


def render_params(params: ParameterStore) -> str:
    """`param <pid> = <decimal>` per line, full repr precision."""
    return "".join(f"param {pid} = {repr(params[pid])}\n" for pid in params)


def parse_params(text: str, base: ParameterStore, source: str = "params") -> ParameterStore:
    """Overlay a parameter file onto the template's store."""
    params = base.copy()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4 or parts[0] != "param" or parts[2] != "=":
            raise ParseError("expected 'param <id> = <decimal>'", source, lineno, 1)
        pid = parts[1]
        if pid not in params:
            raise ParseError(f"unknown parameter id {pid!r}", source, lineno, 1)
        try:
            params[pid] = float(parts[3])
        except ValueError:
            raise ParseError(f"malformed decimal {parts[3]!r}", source, lineno, 1) from None
    return params


# ---------------------------------------------------------------------------
# Cross-validation


def make_folds(example_ids, k: int, seed: int) -> dict:
    """Seeded shuffle + round robin: fold sizes differ by at most one."""
    ids = sorted(example_ids)
    if k < 2:
        raise ValueError("xval needs at least 2 folds")
    if len(ids) < k:
        raise ValueError("more folds than examples")
    rng = random.Random(derive_seed(seed, "folds"))
    rng.shuffle(ids)
    return {example_id: i % k for i, example_id in enumerate(ids)}


def crossvalidate(template: Template, examples, queries, k: int, lr_grid, restarts_grid,
                  epochs: int, seed: int, family: str | None = None,
                  cost_kind: str = "squared_sigmoid", capacity: int = DEFAULT_CAPACITY,
                  target_reader=None) -> list:
    """Per-fold held-out 0/1 errors at threshold 0.5.

    Inner selection trains each (learning rate, restarts) grid point on
    the training folds and picks the lowest training risk (0/1 error,
    ties broken by final cost, then grid order).  Held-out targets are
    read only for the final fold evaluation; all target reads go through
    `target_reader(row, fold, purpose)` so tests can verify that.
    """
    reader = target_reader or (lambda row, fold, purpose: row.target)
    folds = make_folds([ex.example_id for ex in examples], k, seed)
    grid = [(lr, rs) for lr in lr_grid for rs in restarts_grid]
    results = []
    for fold in range(k):
        train_examples = [ex for ex in examples if folds[ex.example_id] != fold]
        train_rows = [q for q in queries if folds[q.example_id] != fold]
        held_rows = [q for q in queries if folds[q.example_id] == fold]
        best = None
        for gi, (lr, restarts) in enumerate(grid):
            cfg = TrainConfig(learning_rate=lr, epochs=epochs, restarts=restarts,
                              seed=derive_seed(seed, "fold", fold, "cfg", gi),
                              cost_kind=cost_kind)
            rows = [QueryRow(q.example_id, q.atom, reader(q, fold, "train")) for q in train_rows]
            task = TrainingTask(template, train_examples, rows, cfg, family, capacity)
            compiled = CompiledTask(task)
            try:
                params, _ = train(task, compiled)
            except AllRestartsFailedError:
                continue
            pairs = [(score, reader(q, fold, "risk"))
                     for (q, score, _missing) in compiled.scores(params)]
            key = (zero_one_error(pairs), compiled.total_cost(params), gi)
            if best is None or key < best[0]:
                best = (key, params)
        if best is None:
            raise AllRestartsFailedError(f"every grid point diverged on fold {fold}")
        params = best[1]
        held_by_example = {}
        for q in held_rows:
            held_by_example.setdefault(q.example_id, []).append(q)
        pairs = []
        for ex in examples:
            rows = held_by_example.get(ex.example_id)
            if not rows:
                continue
            net = build(ground(template, ex.facts, capacity), template, ex.example_id)
            vm = forward(net, params, family or template.family)
            for q in rows:
                score, _ = vm.output(net, q.atom)
                pairs.append((score, reader(q, fold, "test")))
        results.append((fold, zero_one_error(pairs)))
    return results


# ---------------------------------------------------------------------------
# Commands


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ParseError(f"cannot read file: {err}", str(path))


def _capacity() -> int:
    raw = os.environ.get("LRNN_CAPACITY")
    if raw is None:
        return DEFAULT_CAPACITY
    try:
        cap = int(raw)
        if cap < 1:
            raise ValueError
    except ValueError:
        raise ParseError(f"LRNN_CAPACITY must be a positive integer, got {raw!r}", "environment")
    return cap


def _load_inputs(args, family=None):
    template = parse_template(_read(args.template), Path(args.template).name, family or "ms")
    examples = parse_examples(_read(args.examples), Path(args.examples).name)
    return template, examples


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def cmd_ground(args) -> int:
    template, examples = _load_inputs(args)
    capacity = _capacity()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    instance_rows, stat_rows = [], []
    for ex in examples:
        grounding = ground(template, ex.facts, capacity)
        net = build(grounding, template, ex.example_id)
        for inst in grounding.instances:
            theta = " ".join(f"{v}={c}" for v, c in inst.theta)
            body = ", ".join(str(b) for b in inst.body)
            instance_rows.append([ex.example_id, inst.clause_id, theta, str(inst.head), body])
        stat_rows.append([ex.example_id, *net.counts()])
    _write_csv(out / "instances.csv",
               ["example_id", "clause_id", "substitution", "head", "body"], instance_rows)
    _write_csv(out / "stats.csv",
               ["example_id", "atom_neurons", "fact_neurons", "rule_neurons", "aggregation_neurons"],
               stat_rows)
    return 0


def _train_config(args) -> TrainConfig:
    return TrainConfig(learning_rate=args.lr, epochs=args.epochs, restarts=args.restarts,
                       seed=args.seed, init_range=tuple(args.init_range),
                       cost_kind=args.cost, train_offsets=not args.freeze_offsets)


def cmd_train(args) -> int:
    template, examples = _load_inputs(args, args.family)
    queries = parse_queries(_read(args.queries), Path(args.queries).name)
    task = TrainingTask(template, examples, queries, _train_config(args),
                        args.family, _capacity())
    compiled = CompiledTask(task)
    params, report = train(task, compiled)
    Path(args.out_params).write_text(render_params(params), encoding="utf-8")
    if args.report:
        Path(args.report).write_text(report.jsonl(), encoding="utf-8")
    pairs = [(score, q.target) for q, score, _ in compiled.scores(params)]
    sys.stdout.write(f"best_restart {report.best_restart}\n")
    sys.stdout.write(f"final_cost {repr(dict(report.finals)[report.best_restart])}\n")
    sys.stdout.write(f"train_accuracy {repr(1.0 - zero_one_error(pairs))}\n")
    return 0


def cmd_predict(args) -> int:
    template, examples = _load_inputs(args, args.family)
    queries = parse_queries(_read(args.queries), Path(args.queries).name)
    params = template.params
    if args.params:
        params = parse_params(_read(args.params), params, Path(args.params).name)
    capacity = _capacity()
    by_example = {}
    for q in queries:
        by_example.setdefault(q.example_id, []).append(q)
    rows = []
    for ex in examples:
        wanted = by_example.pop(ex.example_id, None)
        if not wanted:
            continue
        net = build(ground(template, ex.facts, capacity), template, ex.example_id)
        vm = forward(net, params, args.family)
        for q in wanted:
            score, missing = vm.output(net, q.atom)
            rows.append([q.example_id, str(q.atom), repr(score), "true" if missing else "false"])
    if by_example:
        missing_id = sorted(by_example)[0]
        raise ParseError(f"queries reference unknown example {missing_id!r}", args.queries)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["example_id", "atom", "score", "missing"])
    writer.writerows(rows)
    if args.out:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_xval(args) -> int:
    template, examples = _load_inputs(args, args.family)
    queries = parse_queries(_read(args.queries), Path(args.queries).name)
    results = crossvalidate(template, examples, queries, args.folds, args.lr_grid,
                            args.restarts_grid, args.epochs, args.seed, args.family,
                            args.cost, _capacity())
    mean = sum(err for _, err in results) / len(results)
    rows = [[str(fold), repr(err)] for fold, err in results] + [["mean", repr(mean)]]
    _write_csv(args.out, ["fold", "error"], rows)
    sys.stdout.write(f"mean_error {repr(mean)}\n")
    return 0


def cmd_export_dot(args) -> int:
    template, examples = _load_inputs(args)
    capacity = _capacity()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for ex in examples:
        net = build(ground(template, ex.facts, capacity), template, ex.example_id)
        (out / f"{ex.example_id}.dot").write_text(export_dot(net), encoding="utf-8")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing


def _comma_floats(text: str) -> list:
    return [float(part) for part in text.split(",") if part]


def _comma_ints(text: str) -> list:
    return [int(part) for part in text.split(",") if part]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lrnn", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, family=True):
        p.add_argument("--template", required=True, help="template file")
        p.add_argument("--examples", required=True, help="example set file")
        if family:
            p.add_argument("--family", choices=["godel", "ms", "as"], default="ms",
                           help="activation family (default ms)")

    p = sub.add_parser("ground", help="write instance lists and neuron stats")
    add_common(p, family=False)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=cmd_ground)

    p = sub.add_parser("train", help="fit learnable parameters")
    add_common(p)
    p.add_argument("--queries", required=True, help="query file with targets")
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--restarts", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init-range", type=float, nargs=2, default=(-1.0, 1.0),
                   metavar=("LO", "HI"))
    p.add_argument("--cost", choices=["squared_sigmoid", "cross_entropy"],
                   default="squared_sigmoid")
    p.add_argument("--freeze-offsets", action="store_true",
                   help="keep conjunction/disjunction offsets at their initial values")
    p.add_argument("--out-params", required=True, help="parameter file to write")
    p.add_argument("--report", help="JSONL cost-curve report to write")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("predict", help="score query atoms")
    add_common(p)
    p.add_argument("--queries", required=True, help="query file (targets ignored)")
    p.add_argument("--params", help="parameter file from train")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("xval", help="k-fold cross-validation")
    add_common(p)
    p.add_argument("--queries", required=True, help="query file with targets")
    p.add_argument("--folds", type=int, required=True)
    p.add_argument("--lr-grid", type=_comma_floats, default=[0.5],
                   help="comma-separated learning rates (default 0.5)")
    p.add_argument("--restarts-grid", type=_comma_ints, default=[3],
                   help="comma-separated restart counts (default 3)")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cost", choices=["squared_sigmoid", "cross_entropy"],
                   default="squared_sigmoid")
    p.add_argument("--out", required=True, help="per-fold error CSV to write")
    p.set_defaults(fn=cmd_xval)

    p = sub.add_parser("export-dot", help="write Graphviz files")
    add_common(p, family=False)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=cmd_export_dot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except RecursiveTemplateError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except CapacityError as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    except (ValueError, LrnnError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
