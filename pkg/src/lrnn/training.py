"""Weight learning: reverse-mode gradients plus online SGD with restarts.

Gradients of shared parameters accumulate by plain summation over all
edge occurrences, which is exact because a parameter occurs at most once
on any simple path of a ground network.  Max aggregations route their
gradient solely to the argmax input.  Updates are online: after each
example's queries are backpropagated, weights move immediately by
w <- w - lr * grad.  Restarts redraw the learnable weights from
Uniform(init_range) with seeds derived from the master seed, and the
restart with the lowest final training cost wins; a restart whose
parameters go non-finite is skipped and noted in the report.
"""

import hashlib
import json
import math
import random
from dataclasses import dataclass, field

from .activations import AVG_SIGMOID, FAMILIES, MAX_SIGMOID, sigmoid
from .errors import AllRestartsFailedError, DivergenceError
from .grounding import DEFAULT_CAPACITY, ParamRef, ground
from .logic import KIND_WEIGHT, ParameterStore, Template
from .network import ATOM, FACT, GroundNetwork, ValueMap, build, forward

SQUARED_SIGMOID = "squared_sigmoid"
CROSS_ENTROPY = "cross_entropy"
COST_KINDS = (SQUARED_SIGMOID, CROSS_ENTROPY)


def derive_seed(*parts) -> int:
    """Deterministic 64-bit seed from a tuple of parts (hash-seed proof)."""
    digest = hashlib.sha256(repr(parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _softplus(x: float) -> float:
    return max(x, 0.0) + math.log1p(math.exp(-abs(x)))


def cost(y: float, target: float, kind: str = SQUARED_SIGMOID) -> tuple:
    """Per-query cost and its derivative in the raw score y.

    squared_sigmoid: 0.5 * (sigm(target) - sigm(y))^2  (the target passes
    through the same squashing as the score); cross_entropy: logistic
    loss of sigm(y) against the target.
    """
    if kind == SQUARED_SIGMOID:
        st, sy = sigmoid(target), sigmoid(y)
        return 0.5 * (st - sy) ** 2, (sy - st) * sy * (1.0 - sy)
    if kind == CROSS_ENTROPY:
        return target * _softplus(-y) + (1.0 - target) * _softplus(y), sigmoid(y) - target
    raise ValueError(f"unknown cost kind {kind!r}")


def backward(net: GroundNetwork, vm: ValueMap, query_grads: dict, params) -> dict:
    """Reverse sweep; returns parameter id -> accumulated gradient.

    query_grads maps ground atoms to d cost / d score seeds; atoms absent
    from the network contribute nothing (their score is a constant 0).
    """
    adjoint = [0.0] * len(net.neurons)
    for atom, g in query_grads.items():
        nid = net.outputs.get(atom)
        if nid is not None:
            adjoint[nid] += g
    grads = {}
    values = vm.values
    for neuron in reversed(net.neurons):
        g = adjoint[neuron.nid]
        if g == 0.0 or neuron.kind == FACT:
            continue
        ev = vm.evals[neuron.nid]
        partials = ev.partials
        if neuron.kind == ATOM:
            for src, ref, p in zip(neuron.inputs, neuron.weights, partials):
                if p == 0.0:
                    continue
                if type(ref) is ParamRef:
                    grads[ref.pid] = grads.get(ref.pid, 0.0) + g * p * values[src]
                    adjoint[src] += g * p * params[ref.pid]
                else:
                    adjoint[src] += g * p * ref.value
        else:
            for src, p in zip(neuron.inputs, partials):
                if p != 0.0:
                    adjoint[src] += g * p
        if neuron.offset_pid is not None and ev.offset_partial != 0.0:
            pid = neuron.offset_pid
            grads[pid] = grads.get(pid, 0.0) + g * ev.offset_partial
    return grads


@dataclass
class TrainConfig:
    learning_rate: float = 0.5
    epochs: int = 100
    restarts: int = 3
    seed: int = 0
    init_range: tuple = (-1.0, 1.0)
    cost_kind: str = SQUARED_SIGMOID
    shuffle: bool = True
    train_offsets: bool = True

    def __post_init__(self):
        if self.learning_rate < 0.0:
            raise ValueError("learning_rate must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        lo, hi = self.init_range
        if not lo < hi:
            raise ValueError("init_range must be an open interval (lo < hi)")
        if self.cost_kind not in COST_KINDS:
            raise ValueError(f"unknown cost kind {self.cost_kind!r}")


@dataclass
class TrainingTask:
    template: Template
    examples: list
    queries: list  # QueryRow-like: .example_id, .atom, .target
    config: TrainConfig = field(default_factory=TrainConfig)
    family: str | None = None  # None -> template.family
    capacity: int = DEFAULT_CAPACITY

    def __post_init__(self):
        fam = self.family or self.template.family
        if fam not in FAMILIES:
            raise ValueError(f"unknown activation family {fam!r}")
        self.family = fam
        ids = {ex.example_id for ex in self.examples}
        for q in self.queries:
            if q.example_id not in ids:
                raise ValueError(f"query references unknown example {q.example_id!r}")
            if not math.isfinite(q.target):
                raise ValueError(f"query target for {q.atom} is not finite")


@dataclass
class TrainReport:
    curves: list = field(default_factory=list)  # (restart, epoch, cost)
    finals: list = field(default_factory=list)  # (restart, final cost)
    skipped: list = field(default_factory=list)  # (restart, reason)
    best_restart: int | None = None

    def jsonl(self) -> str:
        lines = [json.dumps({"restart": r, "epoch": e, "cost": c}) for r, e, c in self.curves]
        lines += [json.dumps({"restart": r, "status": "diverged", "reason": reason})
                  for r, reason in self.skipped]
        if self.best_restart is not None:
            best = dict(self.finals)[self.best_restart]
            lines.append(json.dumps({"best_restart": self.best_restart, "final_cost": best}))
        return "".join(line + "\n" for line in lines)


class CompiledTask:
    """Groundings and networks built once; reused across epochs/restarts."""

    def __init__(self, task: TrainingTask):
        self.task = task
        self.nets = []
        for ex in task.examples:
            grounding = ground(task.template, ex.facts, task.capacity)
            self.nets.append(build(grounding, task.template, ex.example_id))
        by_example = {ex.example_id: [] for ex in task.examples}
        for q in task.queries:
            by_example[q.example_id].append(q)
        self.queries = [by_example[ex.example_id] for ex in task.examples]

    def learnable(self) -> frozenset:
        params = self.task.template.params
        pids = {pid for pid in params.learnable if params.kinds[pid] == KIND_WEIGHT}
        if self.task.config.train_offsets and self.task.family in (MAX_SIGMOID, AVG_SIGMOID):
            pids.update(pid for pid in params.learnable if params.kinds[pid] != KIND_WEIGHT)
        return frozenset(pids)

    def initial_params(self, restart_seed: int) -> ParameterStore:
        params = self.task.template.params.copy()
        rng = random.Random(restart_seed)
        lo, hi = self.task.config.init_range
        for pid in sorted(p for p in params.learnable if params.kinds[p] == KIND_WEIGHT):
            params[pid] = rng.uniform(lo, hi)
        return params

    def total_cost(self, params) -> float:
        total = 0.0
        for net, queries in zip(self.nets, self.queries):
            if not queries:
                continue
            vm = forward(net, params, self.task.family)
            for q in queries:
                y, _ = vm.output(net, q.atom)
                total += cost(y, q.target, self.task.config.cost_kind)[0]
        return total

    def scores(self, params) -> list:
        """(query, score, missing) for every query, input order."""
        out = []
        for net, queries in zip(self.nets, self.queries):
            if not queries:
                continue
            vm = forward(net, params, self.task.family)
            for q in queries:
                y, missing = vm.output(net, q.atom)
                out.append((q, y, missing))
        return out


def sgd_epoch(compiled: CompiledTask, params, learnable, rng, epoch: int = 0) -> float:
    """One online pass: per-example gradient step, then the epoch cost
    over all queries under the post-epoch parameters."""
    task = compiled.task
    cfg = task.config
    order = list(range(len(compiled.nets)))
    if cfg.shuffle:
        rng.shuffle(order)
    lr = cfg.learning_rate
    for idx in order:
        queries = compiled.queries[idx]
        if not queries:
            continue
        net = compiled.nets[idx]
        vm = forward(net, params, task.family)
        query_grads = {}
        for q in queries:
            y, missing = vm.output(net, q.atom)
            if missing:
                continue
            dy = cost(y, q.target, cfg.cost_kind)[1]
            query_grads[q.atom] = query_grads.get(q.atom, 0.0) + dy
        if not query_grads:
            continue
        grads = backward(net, vm, query_grads, params)
        for pid, g in grads.items():
            if pid in learnable:
                value = params[pid] - lr * g
                if not math.isfinite(value):
                    raise DivergenceError(pid, epoch)
                params[pid] = value
    return compiled.total_cost(params)


def train(task: TrainingTask, compiled: CompiledTask | None = None) -> tuple:
    """Run all restarts; return (best ParameterStore, TrainReport)."""
    compiled = compiled or CompiledTask(task)
    learnable = compiled.learnable()
    cfg = task.config
    report = TrainReport()
    best = None
    for restart in range(cfg.restarts):
        seed = derive_seed(cfg.seed, "restart", restart)
        params = compiled.initial_params(seed)
        rng = random.Random(derive_seed(seed, "shuffle"))
        final = None
        try:
            for epoch in range(cfg.epochs):
                final = sgd_epoch(compiled, params, learnable, rng, epoch)
                report.curves.append((restart, epoch, final))
        except DivergenceError as err:
            report.skipped.append((restart, str(err)))
            continue
        report.finals.append((restart, final))
        if best is None or final < best[0]:
            best = (final, restart, params.copy())
    if best is None:
        raise AllRestartsFailedError("all restarts diverged")
    report.best_restart = best[1]
    return best[2], report


def predict(template: Template, params, example, query_atom, family: str | None = None,
            capacity: int = DEFAULT_CAPACITY) -> tuple:
    """(score, missing) of one ground query atom for one example."""
    grounding = ground(template, example.facts, capacity)
    net = build(grounding, template, example.example_id)
    vm = forward(net, params, family or template.family)
    return vm.output(net, query_atom)


def zero_one_error(pairs) -> float:
    """Mean classification disagreement at threshold 0.5 over (score, target)."""
    pairs = list(pairs)
    if not pairs:
        return 0.0
    wrong = sum(1 for score, target in pairs if (score > 0.5) != (target >= 0.5))
    return wrong / len(pairs)
