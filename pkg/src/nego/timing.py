"""Timing analysis: utilization and response-time bounds with feedback.

Two interference models share one entry point.  `busy-window` iterates the
classic response-time recurrence (activation counts via the chains' event
models, extended over multi-activation busy periods when a window outgrows
its own period); `single-blocking` charges every interfering task once.
A failed requirement produces priority nogoods that tell the store which
demotions could help, or a structural forbid when no demotion can.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from nego.constraints import (
    ConnLit,
    Constraint,
    ForbidConjunction,
    Literal,
    MapLit,
    PriorityNogood,
    PriorityPrecedence,
    sort_constraints,
)
from nego.model import Configuration, PlatformModel, QualId, qual_str
from nego.taskgraph import NORMAL, Chain, EventModel, TaskGraph, TaskNode, total_wcet

BUSY_WINDOW = "busy-window"
SINGLE_BLOCKING = "single-blocking"
MODELS = (BUSY_WINDOW, SINGLE_BLOCKING)


def chain_utilization(chain: Chain, cfg: Configuration) -> dict[str, Fraction]:
    """Per-resource demand fraction of one periodic chain."""
    if chain.event is None:
        return {}
    demand: dict[str, int] = {}
    for node in chain.nodes:
        resource = cfg.mapping[node.task_id]
        demand[resource] = demand.get(resource, 0) + node.wcet
    return {r: Fraction(w, chain.event.period) for r, w in demand.items()}


def utilization(graph: TaskGraph, cfg: Configuration, platform: PlatformModel) -> dict[str, Fraction]:
    """Total demand fraction per resource; one-shot chains contribute none."""
    out: dict[str, Fraction] = {res.name: Fraction(0) for res in platform.resources}
    for chain in graph.chains:
        if chain.event is None and graph.mode == NORMAL:
            raise ValueError(f"chain {qual_str(chain.root)} has no resolved period in normal mode")
        for resource, frac in chain_utilization(chain, cfg).items():
            out[resource] += frac
    return out


# ---------------------------------------------------------------------------
# Latency bounds


def _iteration_cap(graph: TaskGraph) -> int:
    total = sum(total_wcet(chain) for chain in graph.chains)
    periods = [chain.event.period for chain in graph.chains if chain.event is not None]
    if not periods:
        return 64
    return max(64, 10 * total // min(periods))


def _interferers(
    chain: Chain,
    range_nodes: Sequence[TaskNode],
    graph: TaskGraph,
    cfg: Configuration,
    ranks: Mapping[QualId, int],
) -> list[tuple[Chain, list[TaskNode]]]:
    """Per other chain, the tasks that can preempt the range: mapped onto one
    of the range's resources and owned by a thread that outranks the range's
    lowest-priority thread."""
    resources = {cfg.mapping[n.task_id] for n in range_nodes}
    floor = max(ranks[n.thread] for n in range_nodes)
    out: list[tuple[Chain, list[TaskNode]]] = []
    for other in graph.chains:
        if other.root == chain.root:
            continue
        tasks = [
            n
            for n in other.nodes
            if cfg.mapping[n.task_id] in resources and ranks[n.thread] < floor
        ]
        if tasks:
            out.append((other, tasks))
    return out


def _fixed_window(base: int, interference: Sequence[tuple[EventModel | None, int]], cap: int) -> int | None:
    window = base
    for _ in range(cap):
        nxt = base + sum(
            (1 if event is None else event.eta(window)) * demand for event, demand in interference
        )
        if nxt == window:
            return window
        window = nxt
    return None


def chain_latency_bound(
    chain: Chain,
    span: tuple[int, int],
    graph: TaskGraph,
    cfg: Configuration,
    ranks: Mapping[QualId, int],
    model: str,
    cap: int | None = None,
) -> int | None:
    """Upper bound on the span's latency, or None when the analysis cannot
    bound it (the busy window never closes within the iteration cap)."""
    if model not in MODELS:
        raise ValueError(f"unknown interference model {model!r}")
    range_nodes = chain.span_nodes(span)
    if not range_nodes:
        return 0
    own = sum(n.wcet for n in range_nodes)
    interferers = _interferers(chain, range_nodes, graph, cfg, ranks)
    if model == SINGLE_BLOCKING:
        return own + sum(n.wcet for _, tasks in interferers for n in tasks)
    if cap is None:
        cap = _iteration_cap(graph)
    interference = [
        (other.event, sum(n.wcet for n in tasks)) for other, tasks in interferers
    ]
    best = 0
    q = 1
    while True:
        window = _fixed_window(q * own, interference, cap)
        if window is None:
            return None
        if chain.event is None:
            return window
        period, jitter = chain.event.period, chain.event.jitter
        release = 0 if q == 1 else (q - 1) * period - jitter
        best = max(best, window - release)
        if window <= q * period - jitter:
            return best
        q += 1
        if q > cap:
            return None


# ---------------------------------------------------------------------------
# Verdicts and feedback


@dataclass(frozen=True)
class TimingVerdict:
    chain_root: QualId
    target: str
    bound: int | None  # required bound; None when the chain states none
    computed: int | None  # None: unbounded
    passed: bool
    model: str

    def line(self) -> str:
        bound = "inf" if self.bound is None else str(self.bound)
        computed = "unbounded" if self.computed is None else str(self.computed)
        verdict = "PASS" if self.passed else "FAIL"
        return f"timing {bound} {self.target}: bound={computed} {verdict} model={self.model}"


@dataclass(frozen=True)
class TimingReport:
    model: str
    utilization: Mapping[str, Fraction]
    verdicts: tuple[TimingVerdict, ...]
    constraints: tuple[Constraint, ...]

    @property
    def ok(self) -> bool:
        return not self.constraints

    def lines(self) -> list[str]:
        out = []
        for resource in sorted(self.utilization):
            frac = self.utilization[resource]
            state = "OVERLOAD" if frac > 1 else "OK"
            out.append(f"utilization {resource}: {frac} {state}")
        out.extend(v.line() for v in self.verdicts)
        return out


def _conn_lits(chains: Iterable[Chain]) -> set[Literal]:
    return {ConnLit(*edge) for chain in chains for edge in chain.connections_used}


def _map_lits(nodes: Iterable[TaskNode], cfg: Configuration) -> set[Literal]:
    return {MapLit(n.component, n.task, cfg.mapping[n.task_id]) for n in nodes}


def _overload_forbid(graph: TaskGraph, cfg: Configuration, resource: str) -> ForbidConjunction:
    """Pin the overload on the structure that caused it: the connections of
    every contributing periodic chain plus the placement of its tasks."""
    literals: set[Literal] = set()
    for chain in graph.chains:
        if chain.event is None:
            continue
        on_resource = [n for n in chain.nodes if cfg.mapping[n.task_id] == resource]
        if not on_resource:
            continue
        literals |= _conn_lits([chain])
        literals |= _map_lits(on_resource, cfg)
    return ForbidConjunction(frozenset(literals))


def _latency_feedback(
    chain: Chain,
    range_nodes: Sequence[TaskNode],
    bound: int,
    interferers: Sequence[tuple[Chain, list[TaskNode]]],
    cfg: Configuration,
    ranks: Mapping[QualId, int],
) -> list[Constraint]:
    own = sum(n.wcet for n in range_nodes)
    structural = ForbidConjunction(
        frozenset(_conn_lits([chain]) | _map_lits(range_nodes, cfg))
    )
    if own > bound:
        # No demotion can help: the range alone exceeds the bound.
        return [structural]
    if not interferers:
        return [structural]
    context = frozenset(
        _conn_lits([chain])
        | _conn_lits(other for other, _ in interferers)
        | _map_lits(range_nodes, cfg)
        | _map_lits((n for _, tasks in interferers for n in tasks), cfg)
    )
    floor_thread = max((n.thread for n in range_nodes), key=lambda t: ranks[t])
    interfering_threads = sorted({n.thread for _, tasks in interferers for n in tasks})
    out: list[Constraint] = [
        PriorityNogood(context, frozenset((t, floor_thread) for t in interfering_threads))
    ]
    # A single interferer too big for the slack can never sit above any range
    # thread; emit one demotion nogood per (big task, range thread) pair.
    slack = bound - own
    range_threads = sorted({n.thread for n in range_nodes})
    big = sorted(
        {n.thread for _, tasks in interferers for n in tasks if n.wcet > slack}
    )
    for thread in big:
        for below in range_threads:
            out.append(PriorityNogood(context, frozenset({(thread, below)})))
    return out


def check_timing(
    graph: TaskGraph, cfg: Configuration, platform: PlatformModel, model: str
) -> TimingReport:
    """Utilization first; latency bounds only on non-overloaded systems."""
    util = utilization(graph, cfg, platform)
    overloaded = sorted(r for r, frac in util.items() if frac > 1)
    if overloaded:
        constraints = [_overload_forbid(graph, cfg, r) for r in overloaded]
        return TimingReport(model, util, (), tuple(sort_constraints(constraints)))

    ranks = cfg.ranks()
    cap = _iteration_cap(graph)
    verdicts: list[TimingVerdict] = []
    constraints: dict[Constraint, None] = {}
    for chain in graph.chains:
        if not chain.nodes:
            continue
        if chain.requirements:
            rows = [(req.bound, req.span, req.target) for req in chain.requirements]
        else:
            rows = [(None, (0, len(chain.nodes)), qual_str(chain.root))]
        for bound, span, target in rows:
            computed = chain_latency_bound(chain, span, graph, cfg, ranks, model, cap)
            if bound is None:
                passed = True
            else:
                passed = computed is not None and computed <= bound
            verdicts.append(TimingVerdict(chain.root, target, bound, computed, passed, model))
            if not passed and bound is not None:
                range_nodes = chain.span_nodes(span)
                interferers = _interferers(chain, range_nodes, graph, cfg, ranks)
                for c in _latency_feedback(chain, range_nodes, bound, interferers, cfg, ranks):
                    constraints[c] = None
    return TimingReport(model, util, tuple(verdicts), tuple(sort_constraints(constraints)))


# ---------------------------------------------------------------------------
# Priority synthesis


def _seed_key(graphs: Sequence[TaskGraph]):
    """Deadline-monotonic seed: a thread is keyed by the tightest latency
    bound over any requirement span its tasks appear in."""
    tightest: dict[QualId, int] = {}
    for graph in graphs:
        for chain in graph.chains:
            for req in chain.requirements:
                for node in chain.span_nodes(req.span):
                    prior = tightest.get(node.thread)
                    if prior is None or req.bound < prior:
                        tightest[node.thread] = req.bound

    def key(thread: QualId):
        bound = tightest.get(thread)
        if bound is None:
            return (1, 0, thread)
        return (0, bound, thread)

    return key


def synthesize_priorities(
    threads: Sequence[QualId],
    graphs: Sequence[TaskGraph],
    precedences: Sequence[PriorityPrecedence],
    nogoods: Sequence[PriorityNogood],
) -> tuple[QualId, ...] | None:
    """Find a total priority order satisfying the constraints, or None.

    Bottom-up placement with full backtracking: the lowest rank is filled
    first, candidates tried in reverse seed order, so an unconstrained run
    reproduces the deadline-monotonic seed exactly.
    """
    thread_set = frozenset(threads)
    seed = sorted(thread_set, key=_seed_key(graphs))
    reverse = list(reversed(seed))

    must_outrank: dict[QualId, set[QualId]] = {}
    for prec in precedences:
        if prec.above in thread_set and prec.below in thread_set:
            must_outrank.setdefault(prec.above, set()).add(prec.below)

    # Pair (hi, lo) reads "hi outranks lo".  Nogoods with a pair that can
    # never hold are satisfied up front and dropped.
    states: set[frozenset[tuple[QualId, QualId]]] = set()
    for ng in nogoods:
        if not ng.pairs:
            continue
        if any(hi == lo or hi not in thread_set or lo not in thread_set for hi, lo in ng.pairs):
            continue
        states.add(frozenset(ng.pairs))

    def search(
        remaining: frozenset[QualId],
        tail: tuple[QualId, ...],
        undecided: tuple[frozenset[tuple[QualId, QualId]], ...],
    ) -> tuple[QualId, ...] | None:
        if not remaining:
            return tail
        for t in reverse:
            if t not in remaining:
                continue
            if any(below in remaining for below in must_outrank.get(t, ())):
                continue  # t would end up under a thread it must outrank
            next_states: list[frozenset[tuple[QualId, QualId]]] = []
            dead = False
            for pairs in undecided:
                if any(hi == t for hi, _ in pairs):
                    continue  # that pair is now false: nogood satisfied
                newly_true = {p for p in pairs if p[1] == t}
                rest = pairs - newly_true
                if newly_true and not rest:
                    dead = True  # every pair holds: nogood violated
                    break
                next_states.append(rest if newly_true else pairs)
            if dead:
                continue
            found = search(remaining - {t}, (t,) + tail, tuple(next_states))
            if found is not None:
                return found
        return None

    return search(thread_set, (), tuple(sorted(states, key=sorted)))
