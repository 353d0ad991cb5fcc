"""Brute-force references the real implementation is checked against.

`feasible` answers the same question as negotiation by exhaustive search:
every reachable connection assignment, every type-compatible mapping,
every priority permutation.  No learned constraints, no pruning.
"""

from __future__ import annotations

import itertools

from nego.controlflow import check_control_flow
from nego.model import Configuration, SystemModel, pinned_components
from nego.taskgraph import GraphError, INITIALIZATION, NORMAL, build_task_graph
from nego.timing import check_timing


def assignments(software, pinned):
    """Every complete connection assignment over reachable selections."""

    def expand(selected, conns, pending):
        pending = list(pending)
        for client in sorted(selected):
            for svc in sorted(software.contracts[client].requires):
                if (client, svc) not in conns and (client, svc) not in pending:
                    pending.append((client, svc))
        if not pending:
            yield selected, dict(conns)
            return
        client, svc = pending[0]
        rest = pending[1:]
        iface = software.interfaces[svc]
        for provider in sorted(software.providers(svc)):
            if provider == client:
                continue
            if iface.max_clients is not None:
                users = sum(1 for (c, s), p in conns.items() if s == svc and p == provider)
                if users >= iface.max_clients:
                    continue
            conns[(client, svc)] = provider
            yield from expand(selected | {provider}, conns, rest)
            del conns[(client, svc)]

    yield from expand(frozenset(pinned), {}, [])


def count_assignments(software, pinned) -> int:
    return sum(1 for _ in assignments(software, pinned))


def _task_types(software, selected):
    types = {}
    for comp in selected:
        for thread in software.contracts[comp].threads:
            for task in thread.tasks():
                types[(comp, task.name)] = task.resource_type
    return types


def feasible(system: SystemModel, model: str = "busy-window") -> bool:
    software, platform = system.software, system.platform
    pinned = pinned_components(software)
    for selected, conns in assignments(software, pinned):
        connections = frozenset((c, s, p) for (c, s), p in conns.items())
        base = Configuration(selected, connections, {}, ())
        graphs = {}
        try:
            for mode in (NORMAL, INITIALIZATION):
                graphs[mode] = build_task_graph(software, base, mode)
        except GraphError:
            continue
        if check_control_flow(software, base):
            continue
        types = _task_types(software, selected)
        tasks = sorted(types)
        options = [[r.name for r in platform.by_type(types[t])] for t in tasks]
        if any(not opts for opts in options):
            continue
        threads = sorted((c, th.name) for c in selected for th in software.contracts[c].threads)
        for combo in itertools.product(*options):
            mapping = dict(zip(tasks, combo))
            for perm in itertools.permutations(threads):
                cfg = Configuration(selected, connections, mapping, perm)
                if all(check_timing(graphs[m], cfg, platform, model).ok for m in graphs):
                    return True
    return False
