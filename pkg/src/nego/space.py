"""Configuration-space exploration under accumulated constraints.

The store enumerates complete candidate configurations in a fixed order and
never proposes one that violates a recorded constraint or that it has
already emitted.  Connection assignments come first (depth-first over
(client, service) pairs in name order, providers in name order, selection
growing with each chosen provider), then task placements (name order over
tasks, resources in name order), then priority orders: the plain
name-ordered baseline, the synthesized order, and, for small thread counts,
every remaining permutation.
"""

from __future__ import annotations

import itertools
from dataclasses import replace
from typing import Iterator, Sequence

from nego.constraints import (
    Constraint,
    ForbidConjunction,
    PriorityNogood,
    PriorityPrecedence,
    active_priority_constraints,
    constraint_str,
    sort_constraints,
)
from nego.deps import connection_candidates, render_candidates
from nego.dsl import SoftwareModel
from nego.model import Configuration, ModelError, PlatformModel, QualId, qual_str
from nego.taskgraph import INITIALIZATION, NORMAL, GraphError, TaskGraph, build_task_graph
from nego.timing import synthesize_priorities

PERMUTATION_LIMIT = 8  # full permutation fallback only below this many threads


class ConstraintStore:
    def __init__(self, software: SoftwareModel, platform: PlatformModel, pinned: frozenset[str]):
        for comp in sorted(pinned):
            if comp not in software.contracts:
                raise ModelError(f"pinned component {comp!r} does not exist")
        self._software = software
        self._platform = platform
        self._pinned = frozenset(pinned)
        self._constraints: list[Constraint] = []
        self._emitted: set[tuple] = set()

    @property
    def constraints(self) -> tuple[Constraint, ...]:
        return tuple(self._constraints)

    def add_constraint(self, constraint: Constraint) -> None:
        if constraint not in self._constraints:
            self._constraints.append(constraint)

    def add_constraints(self, constraints: Sequence[Constraint]) -> None:
        for c in constraints:
            self.add_constraint(c)

    # --- enumeration

    def _assignments(self) -> Iterator[tuple[frozenset[str], frozenset[tuple[str, str, str]]]]:
        software = self._software

        def recurse(
            selected: frozenset[str], conns: dict[tuple[str, str], str]
        ) -> Iterator[tuple[frozenset[str], frozenset[tuple[str, str, str]]]]:
            pending = sorted(
                (client, service)
                for client in selected
                for service in software.contracts[client].requires
                if (client, service) not in conns
            )
            if not pending:
                yield selected, frozenset((c, s, p) for (c, s), p in conns.items())
                return
            client, service = pending[0]
            iface = software.interfaces.get(service)
            bound = iface.max_clients if iface is not None else None
            for provider in software.providers(service):
                if provider == client:
                    continue
                if bound is not None:
                    clients = sum(1 for (_, s), p in conns.items() if s == service and p == provider)
                    if clients + 1 > bound:
                        continue
                conns[(client, service)] = provider
                yield from recurse(selected | {provider}, conns)
                del conns[(client, service)]

        yield from recurse(self._pinned, {})

    def _mappings(self, selected: frozenset[str]) -> Iterator[dict[QualId, str]]:
        tasks: list[tuple[QualId, str]] = sorted(
            ((comp, step.name), step.resource_type)
            for comp in selected
            for thread in self._software.contracts[comp].threads
            for step in thread.tasks()
        )
        pools = []
        for _, rtype in tasks:
            options = [res.name for res in self._platform.by_type(rtype)]
            if not options:
                return
            pools.append(options)
        for combo in itertools.product(*pools):
            yield {task: resource for (task, _), resource in zip(tasks, combo)}

    def _threads(self, selected: frozenset[str]) -> list[QualId]:
        return sorted(
            (comp, thread.name)
            for comp in selected
            for thread in self._software.contracts[comp].threads
        )

    def _priorities_ok(
        self,
        order: tuple[QualId, ...],
        partial: Configuration,
        precedences: Sequence[PriorityPrecedence],
        nogoods: Sequence[PriorityNogood],
    ) -> bool:
        ranks = {t: i for i, t in enumerate(order)}
        if any(p.violated_by(ranks) for p in precedences):
            return False
        candidate = replace(partial, priorities=order)
        return not any(ng.violated_by(candidate, ranks) for ng in nogoods)

    def _priority_candidates(
        self, partial: Configuration, threads: list[QualId]
    ) -> Iterator[tuple[QualId, ...]]:
        precedences, nogoods = active_priority_constraints(self._constraints, partial)
        baseline = tuple(threads)
        if self._priorities_ok(baseline, partial, precedences, nogoods):
            yield baseline
        graphs: tuple[TaskGraph, ...] | None
        try:
            graphs = (
                build_task_graph(self._software, partial, NORMAL),
                build_task_graph(self._software, partial, INITIALIZATION),
            )
        except GraphError:
            graphs = None  # structure is broken; negotiation will learn why
        if graphs is not None:
            synthesized = synthesize_priorities(threads, graphs, precedences, nogoods)
            if synthesized is not None:
                yield synthesized
        if len(threads) <= PERMUTATION_LIMIT:
            for perm in itertools.permutations(threads):
                if self._priorities_ok(perm, partial, precedences, nogoods):
                    yield perm

    @staticmethod
    def _fingerprint(cfg: Configuration) -> tuple:
        return (cfg.selected, cfg.connections, tuple(sorted(cfg.mapping.items())), cfg.priorities)

    def next_candidate(self) -> Configuration | None:
        """The next unseen configuration compatible with every constraint,
        or None when the space is exhausted."""
        forbids = [c for c in self._constraints if isinstance(c, ForbidConjunction)]
        for selected, connections in self._assignments():
            for mapping in self._mappings(selected):
                partial = Configuration(selected, connections, mapping, ())
                if any(f.blocks(partial) for f in forbids):
                    continue
                threads = self._threads(selected)
                for order in self._priority_candidates(partial, threads):
                    candidate = replace(partial, priorities=order)
                    fingerprint = self._fingerprint(candidate)
                    if fingerprint in self._emitted:
                        continue
                    self._emitted.add(fingerprint)
                    return candidate
        return None

    def dump(self) -> str:
        lines = [f"pinned: {' '.join(sorted(self._pinned))}"]
        summary = connection_candidates(self._software, self._pinned)
        lines.extend(render_candidates(summary).splitlines())
        for comp in sorted(summary.requirements):
            names = " ".join(qual_str(t) for t in self._threads(frozenset({comp})))
            if names:
                lines.append(f"threads {comp}: {names}")
        lines.append(f"constraints: {len(self._constraints)}")
        lines.extend("  " + constraint_str(c) for c in sort_constraints(self._constraints))
        return "\n".join(lines) + "\n"
