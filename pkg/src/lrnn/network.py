"""Ground neural networks compiled from a grounding.

One network per example.  Four neuron kinds, wired bottom-up:

    fact  - one per weighted ground fact, constant output 1.0; the fact
            weight sits on its outgoing edge
    rule  - one per active ground rule instance, conjunction over the
            body atom neurons (unit edge weights)
    agg   - one per (clause, ground head) with instances, aggregation
            over that clause's rule neurons (unit edge weights)
    atom  - one per distinct ground atom, disjunction over its clauses'
            aggregation neurons (edge weight = clause weight parameter)
            and its fact neurons (edge weight = fact weight); an atom fed
            by facts alone skips the disjunction and outputs the weighted
            sum directly

Shared parameters appear on edges as ParamRef and at most once on any
simple path, so accumulated gradients stay exact.  Neuron order is
topological and deterministic: facts first, then predicates from the
leaves of the template dependency order upward, atoms sorted within a
predicate.
"""

import math
from dataclasses import dataclass, field

from .activations import ActivationEval, eval_agg, eval_conj, eval_disj
from .grounding import ConstRef, Grounding, ParamRef
from .logic import Atom, Template, check_nonrecursive, ground_atom_key

FACT, ATOM, RULE, AGG = 0, 1, 2, 3
KIND_NAMES = ("fact", "atom", "rule", "agg")

_UNIT = ConstRef(1.0)


@dataclass(slots=True)
class Neuron:
    nid: int
    kind: int
    label: str
    inputs: tuple = ()  # neuron ids, evaluation order
    weights: tuple = ()  # ParamRef | ConstRef, parallel to inputs
    offset_pid: str | None = None  # conj offset (rule) or disj offset (atom)


@dataclass
class GroundNetwork:
    neurons: list
    outputs: dict  # ground Atom -> atom neuron id
    example_id: str | None = None

    def counts(self) -> tuple:
        """(atom, fact, rule, agg) neuron counts."""
        n = [0, 0, 0, 0]
        for neuron in self.neurons:
            n[neuron.kind] += 1
        return (n[ATOM], n[FACT], n[RULE], n[AGG])

    def edge_count(self) -> int:
        return sum(len(neuron.inputs) for neuron in self.neurons)


def build(grounding: Grounding, template: Template, example_id: str | None = None) -> GroundNetwork:
    ordering = check_nonrecursive(template)
    position = {sig: i for i, sig in enumerate(ordering)}

    def emission_key(atom: Atom) -> tuple:
        # Example-only predicates are pure leaves and go first; template
        # predicates go body-before-head (reverse of the head-first order).
        rank = len(ordering) - position[atom.signature] if atom.signature in position else 0
        return (rank, ground_atom_key(atom))

    atoms = set()
    for inst in grounding.instances:
        atoms.add(inst.head)
        atoms.update(inst.body)
    for atom, _ in grounding.ground_facts:
        atoms.add(atom)

    clause_by_id = {c.clause_id: c for c in template.clauses}
    grouped = {}  # head atom -> {clause_id: [instances]} in encounter order
    for inst in grounding.instances:
        grouped.setdefault(inst.head, {}).setdefault(inst.clause_id, []).append(inst)

    neurons, outputs = [], {}

    def emit(kind, label, inputs=(), weights=(), offset_pid=None) -> int:
        nid = len(neurons)
        neurons.append(Neuron(nid, kind, label, tuple(inputs), tuple(weights), offset_pid))
        return nid

    facts_by_atom = {}
    for atom, ref in grounding.ground_facts:
        nid = emit(FACT, str(atom))
        facts_by_atom.setdefault(atom, []).append((nid, ref))

    for atom in sorted(atoms, key=emission_key):
        agg_inputs, agg_weights = [], []
        for clause_id, insts in grouped.get(atom, {}).items():
            clause = clause_by_id[clause_id]
            rule_ids = []
            for inst in insts:
                body_ids = [outputs[b] for b in inst.body]
                label = f"{inst.head} :- {', '.join(str(b) for b in inst.body)}"
                rule_ids.append(emit(RULE, label, body_ids, [_UNIT] * len(body_ids),
                                     template.conj_offset_pid(clause)))
            agg_id = emit(AGG, f"{clause_id} => {atom}", rule_ids, [_UNIT] * len(rule_ids))
            agg_inputs.append(agg_id)
            agg_weights.append(ParamRef(clause.weight_ref))
        for fact_id, ref in facts_by_atom.get(atom, ()):
            agg_inputs.append(fact_id)
            agg_weights.append(ref)
        offset = template.disj_offset_pid(atom.signature) if grouped.get(atom) else None
        outputs[atom] = emit(ATOM, str(atom), agg_inputs, agg_weights, offset)

    return GroundNetwork(neurons, outputs, example_id)


@dataclass
class ValueMap:
    """Per-neuron outputs of one forward pass, plus the evals needed to
    run the reverse sweep (None for fact neurons)."""

    values: list
    evals: list

    def output(self, net: GroundNetwork, atom: Atom) -> tuple:
        """(value, missing): missing queries evaluate to 0.0."""
        nid = net.outputs.get(atom)
        if nid is None:
            return (0.0, True)
        return (self.values[nid], False)


def resolve(ref, params) -> float:
    return ref.value if type(ref) is ConstRef else params[ref.pid]


def forward(net: GroundNetwork, params, family: str) -> ValueMap:
    values = [0.0] * len(net.neurons)
    evals = [None] * len(net.neurons)
    for neuron in net.neurons:
        kind = neuron.kind
        if kind == FACT:
            values[neuron.nid] = 1.0
            continue
        if kind == RULE:
            ev = eval_conj(family, [values[s] for s in neuron.inputs], params[neuron.offset_pid])
        elif kind == AGG:
            ev = eval_agg(family, [values[s] for s in neuron.inputs])
        else:
            terms = [resolve(w, params) * values[s] for s, w in zip(neuron.inputs, neuron.weights)]
            if neuron.offset_pid is None:
                # Fact-only atom: no clause aggregations, pass the weighted sum through.
                ev = ActivationEval(math.fsum(terms), [1.0] * len(terms))
            else:
                ev = eval_disj(family, terms, params[neuron.offset_pid])
        values[neuron.nid] = ev.value
        evals[neuron.nid] = ev
    return ValueMap(values, evals)


_SHAPES = {FACT: "box", ATOM: "ellipse", RULE: "diamond", AGG: "trapezium"}


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(net: GroundNetwork) -> str:
    """Graphviz text: node shape encodes the neuron kind, edge labels
    carry parameter ids (shared weights) or non-unit constants."""
    lines = ["digraph ground_network {"]
    for neuron in net.neurons:
        lines.append(f"  n{neuron.nid} [shape={_SHAPES[neuron.kind]}, label={_quote(neuron.label)}];")
    for neuron in net.neurons:
        for src, ref in zip(neuron.inputs, neuron.weights):
            if type(ref) is ParamRef:
                lines.append(f"  n{src} -> n{neuron.nid} [label={_quote(ref.pid)}];")
            elif ref.value != 1.0:
                lines.append(f"  n{src} -> n{neuron.nid} [label={_quote(repr(ref.value))}];")
            else:
                lines.append(f"  n{src} -> n{neuron.nid};")
    lines.append("}")
    return "\n".join(lines) + "\n"
