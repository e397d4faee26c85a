"""Least Herbrand model and per-example grounding.

The model of template rules plus (template and example) facts is
computed bottom-up with semi-naive evaluation: each round only joins
rule bodies against tuples derived in the previous round (the delta),
so nothing is re-derived from scratch.  The grounding then enumerates,
against the finished model, every substitution that makes a rule body
true; those are exactly the ground rules that stay active in the least
model.

Variables occurring only in a clause head (including facts written with
variables) range over the full constant universe of template + example.
"""

import itertools
from dataclasses import dataclass

from .errors import CapacityError
from .logic import Atom, Constant, Template, Variable, apply, ground_atom_key

DEFAULT_CAPACITY = 10**7


@dataclass(frozen=True, slots=True)
class HerbrandModel:
    atoms: frozenset
    universe: tuple  # sorted constant names

    def __contains__(self, atom: Atom) -> bool:
        return atom in self.atoms

    def sorted_atoms(self) -> list:
        return sorted(self.atoms, key=ground_atom_key)


@dataclass(frozen=True, slots=True)
class ParamRef:
    """Edge weight taken from the shared parameter store."""

    pid: str


@dataclass(frozen=True, slots=True)
class ConstRef:
    """Fixed edge weight (structural 1.0 or an example fact value)."""

    value: float


@dataclass(frozen=True, slots=True)
class GroundRuleInstance:
    clause_id: str
    theta: tuple  # sorted ((var name, const name), ...)
    head: Atom
    body: tuple

    def substitution(self) -> dict:
        return {Variable(v): Constant(c) for v, c in self.theta}


@dataclass(frozen=True, slots=True)
class Grounding:
    model: HerbrandModel
    instances: tuple  # GroundRuleInstance, ordered by (clause ordinal, theta)
    ground_facts: tuple  # (Atom, ParamRef | ConstRef), template facts then example facts


def _compile_pattern(atom: Atom) -> tuple:
    # ('c', name) fixed argument, ('v', name) variable slot.
    return tuple(("c", t.name) if isinstance(t, Constant) else ("v", t.name) for t in atom.args)


def _match(pattern, row, subst) -> dict | None:
    """Extend subst so pattern covers row, or None on clash."""
    out = subst
    for (kind, name), value in zip(pattern, row):
        if kind == "c":
            if name != value:
                return None
        else:
            bound = out.get(name)
            if bound is None:
                if out is subst:
                    out = dict(subst)
                out[name] = value
            elif bound != value:
                return None
    return out


class _Rule:
    __slots__ = ("clause", "ordinal", "head_sig", "head_pat", "body", "head_only")

    def __init__(self, clause, ordinal):
        self.clause = clause
        self.ordinal = ordinal
        self.head_sig = clause.head.signature
        self.head_pat = _compile_pattern(clause.head)
        self.body = [(b.signature, _compile_pattern(b)) for b in clause.body]
        self.head_only = sorted(v.name for v in clause.head_only_variables())


def _join(rule: _Rule, relations, delta_pos: int | None, delta) -> list:
    """All substitutions satisfying the body; position delta_pos (if any)
    must match the delta relation instead of the full one."""
    substs = [{}]
    for pos, (sig, pattern) in enumerate(rule.body):
        source = delta.get(sig, ()) if pos == delta_pos else relations.get(sig, ())
        if not source:
            return []
        extended = []
        for subst in substs:
            for row in source:
                got = _match(pattern, row, subst)
                if got is not None:
                    extended.append(got if got is not subst else dict(subst))
        if not extended:
            return []
        substs = extended
    return substs


def _head_expansions(rule: _Rule, subst, universe):
    """Complete body substitutions with head-only variables over the universe."""
    if not rule.head_only:
        yield subst
        return
    for combo in itertools.product(universe, repeat=len(rule.head_only)):
        full = dict(subst)
        full.update(zip(rule.head_only, combo))
        yield full


def _instantiate_head(rule: _Rule, subst) -> tuple:
    return tuple(name if kind == "c" else subst[name] for kind, name in rule.head_pat)


def _collect_inputs(template: Template, example_facts):
    """Split into compiled rules, ground seed tuples, and the universe."""
    constants = set()
    for c in template.clauses:
        for atom in (c.head, *c.body):
            constants.update(t.name for t in atom.args if isinstance(t, Constant))
    for _, atom in example_facts:
        constants.update(t.name for t in atom.args)
    universe = tuple(sorted(constants))

    rules = [_Rule(c, i) for i, c in enumerate(template.clauses) if not c.is_fact]
    # Fact clauses seed the relations; variable heads expand over the universe.
    seeds = []
    for c in template.clauses:
        if not c.is_fact:
            continue
        pattern = _compile_pattern(c.head)
        vars_ = sorted({name for kind, name in pattern if kind == "v"})
        for combo in itertools.product(universe, repeat=len(vars_)):
            subst = dict(zip(vars_, combo))
            seeds.append((c.head.signature,
                          tuple(name if kind == "c" else subst[name] for kind, name in pattern)))
    for _, atom in example_facts:
        seeds.append((atom.signature, tuple(t.name for t in atom.args)))
    return rules, seeds, universe


def least_herbrand_model(template: Template, example_facts=(), capacity: int = DEFAULT_CAPACITY) -> HerbrandModel:
    """Semi-naive bottom-up fixpoint of the immediate-consequence operator."""
    rules, seeds, universe = _collect_inputs(template, example_facts)
    relations, delta, count = {}, {}, 0
    for sig, row in seeds:
        rel = relations.setdefault(sig, set())
        if row not in rel:
            rel.add(row)
            delta.setdefault(sig, set()).add(row)
            count += 1
    if count > capacity:
        raise CapacityError(count, capacity)

    while delta:
        fresh = {}
        for rule in rules:
            for pos in range(len(rule.body)):
                if rule.body[pos][0] not in delta:
                    continue
                for subst in _join(rule, relations, pos, delta):
                    for full in _head_expansions(rule, subst, universe):
                        row = _instantiate_head(rule, full)
                        rel = relations.get(rule.head_sig)
                        if rel is not None and row in rel:
                            continue
                        if row not in fresh.setdefault(rule.head_sig, set()):
                            fresh[rule.head_sig].add(row)
                            count += 1
                            if count > capacity:
                                raise CapacityError(count, capacity)
        for sig, rows in fresh.items():
            relations.setdefault(sig, set()).update(rows)
        delta = fresh

    atoms = frozenset(Atom(pred, tuple(Constant(n) for n in row))
                      for (pred, _), rows in relations.items() for row in rows)
    return HerbrandModel(atoms, universe)


def ground(template: Template, example_facts=(), capacity: int = DEFAULT_CAPACITY) -> Grounding:
    """All rule instances active in the least model, plus weighted ground facts.

    Instances are deduplicated on (clause, theta restricted to the
    clause's variables) and ordered by (clause ordinal, theta); facts
    come template-first in clause order, then example facts in input
    order.
    """
    model = least_herbrand_model(template, example_facts, capacity)
    relations = {}
    for atom in model.atoms:
        relations.setdefault(atom.signature, set()).add(tuple(t.name for t in atom.args))

    instances = []
    for ordinal, clause in enumerate(template.clauses):
        if clause.is_fact:
            continue
        rule = _Rule(clause, ordinal)
        seen = set()
        found = []
        for subst in _join(rule, relations, None, {}):
            for full in _head_expansions(rule, subst, model.universe):
                theta = tuple(sorted(full.items()))
                if theta in seen:
                    continue
                seen.add(theta)
                bind = {Variable(v): Constant(c) for v, c in full.items()}
                head = apply(bind, clause.head)
                body = tuple(apply(bind, b) for b in clause.body)
                found.append(GroundRuleInstance(clause.clause_id, theta, head, body))
        found.sort(key=lambda inst: inst.theta)
        instances.extend(found)

    ground_facts = []
    for clause in template.clauses:
        if not clause.is_fact:
            continue
        pattern = _compile_pattern(clause.head)
        vars_ = sorted({name for kind, name in pattern if kind == "v"})
        ref = ParamRef(clause.weight_ref)
        for combo in itertools.product(model.universe, repeat=len(vars_)):
            subst = dict(zip(vars_, combo))
            atom = Atom(clause.head.pred,
                        tuple(Constant(name if kind == "c" else subst[name]) for kind, name in pattern))
            ground_facts.append((atom, ref))
    for weight, atom in example_facts:
        ground_facts.append((atom, ConstRef(weight)))

    return Grounding(model, tuple(instances), tuple(ground_facts))
