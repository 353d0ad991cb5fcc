"""Task graph construction: unfold threads into per-mode execution chains.

Each time-activated thread (normal mode) or initialization thread
(initialization mode) roots one chain.  RPC steps splice the callee thread's
steps in place; SIGNAL steps fork a new chain at the callee, inheriting the
trigger's event model.  Latency requirements attach to the node ranges they
cover: whole chains for thread targets, inlined call ranges for method
targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

from nego.dsl import (
    CallStep,
    Contract,
    Initialization,
    MethodRef,
    RpcEntry,
    SoftwareModel,
    TaskStep,
    Thread,
    TimeActivation,
)
from nego.model import Configuration, QualId, qual_str

NORMAL = "normal"
INITIALIZATION = "initialization"
MODES = (NORMAL, INITIALIZATION)


class GraphError(ValueError):
    pass


class CycleError(GraphError):
    pass


class StructuralError(GraphError):
    pass


@dataclass(frozen=True)
class EventModel:
    """Periodic activation with bounded release jitter."""

    period: int
    jitter: int

    def eta(self, window: int) -> int:
        """Max activations whose execution can fall into a window of length
        `window` that starts at a critical instant."""
        if window <= 0:
            return 0
        return math.ceil((window + self.jitter) / self.period)


@dataclass(frozen=True)
class TaskNode:
    component: str
    task: str
    wcet: int
    bcet: int
    resource_type: str
    thread: QualId

    @property
    def task_id(self) -> QualId:
        return (self.component, self.task)

    def __str__(self) -> str:
        return f"{self.component}.{self.task}({self.wcet}/{self.bcet})"


@dataclass(frozen=True)
class LatencyReq:
    bound: int
    span: tuple[int, int]  # node index range [start, stop)
    owner: str  # component that stated the requirement
    target: str  # display text of the requirement target

    def __str__(self) -> str:
        return f"timing {self.bound} {self.target}"


@dataclass(frozen=True)
class Chain:
    root: QualId
    mode: str
    nodes: tuple[TaskNode, ...]
    event: EventModel | None  # None: released once (initialization chains)
    requirements: tuple[LatencyReq, ...] = ()
    triggered_by: tuple[QualId, int] | None = None  # (forking chain root, step index)
    connections_used: frozenset[tuple[str, str, str]] = frozenset()

    def span_nodes(self, span: tuple[int, int]) -> tuple[TaskNode, ...]:
        return self.nodes[span[0] : span[1]]


@dataclass(frozen=True)
class TaskGraph:
    mode: str
    chains: tuple[Chain, ...]

    def tasks(self) -> Iterator[TaskNode]:
        for chain in self.chains:
            yield from chain.nodes

    def chain(self, root: QualId) -> Chain:
        for c in self.chains:
            if c.root == root:
                return c
        raise KeyError(qual_str(root))


def total_wcet(chain: Chain, span: tuple[int, int] | None = None) -> int:
    nodes = chain.nodes if span is None else chain.span_nodes(span)
    return sum(n.wcet for n in nodes)


@dataclass
class _Unfolding:
    nodes: list[TaskNode] = field(default_factory=list)
    # (caller component, service, method, span) per inlined RPC call
    call_spans: list[tuple[str, str, str, tuple[int, int]]] = field(default_factory=list)
    # (component, thread name, span) per inlined callee thread
    thread_spans: list[tuple[QualId, tuple[int, int]]] = field(default_factory=list)
    # (provider, entry thread, caller component, ref, node position) per SIGNAL
    forks: list[tuple[str, Thread, str, MethodRef, int]] = field(default_factory=list)
    connections: set[tuple[str, str, str]] = field(default_factory=set)


def _provider_entry(software: SoftwareModel, provider: str, ref: MethodRef, chain: QualId) -> Thread:
    entry = software.contracts[provider].entry_thread(ref.service, ref.method)
    if entry is None:
        raise StructuralError(
            f"chain {qual_str(chain)}: provider {provider!r} has no entry thread for {ref.service}.{ref.method}"
        )
    return entry


def _unfold_steps(
    software: SoftwareModel,
    cfg: Configuration,
    component: str,
    thread: Thread,
    out: _Unfolding,
    stack: tuple[str, ...],
    chain_root: QualId,
) -> None:
    if component in stack:
        cycle = " -> ".join(stack + (component,))
        raise CycleError(f"chain {qual_str(chain_root)}: call cycle {cycle}")
    stack = stack + (component,)
    for index, step in enumerate(thread.steps):
        if isinstance(step, TaskStep):
            out.nodes.append(
                TaskNode(
                    component=component,
                    task=step.name,
                    wcet=step.wcet,
                    bcet=step.bcet,
                    resource_type=step.resource_type,
                    thread=(component, thread.name),
                )
            )
            continue
        provider = cfg.provider_of(component, step.ref.service)
        if provider is None:
            raise StructuralError(
                f"chain {qual_str(chain_root)}: {component!r} has no connection for service {step.ref.service!r}"
            )
        out.connections.add((component, step.ref.service, provider))
        entry = _provider_entry(software, provider, step.ref, chain_root)
        if step.kind == "SIGNAL":
            out.forks.append((provider, entry, component, step.ref, len(out.nodes)))
            continue
        start = len(out.nodes)
        _unfold_steps(software, cfg, provider, entry, out, stack, chain_root)
        span = (start, len(out.nodes))
        out.call_spans.append((component, step.ref.service, step.ref.method, span))
        out.thread_spans.append(((provider, entry.name), span))


def _attach_requirements(
    software: SoftwareModel,
    cfg: Configuration,
    chain_root: QualId,
    unfolding: _Unfolding,
    trigger: tuple[str, MethodRef] | None,
) -> tuple[LatencyReq, ...]:
    reqs: list[LatencyReq] = []
    whole = (0, len(unfolding.nodes))
    for comp in sorted(cfg.selected):
        for timing in software.contracts[comp].timings:
            if isinstance(timing.target, str):
                if (comp, timing.target) == chain_root:
                    reqs.append(LatencyReq(timing.bound, whole, comp, timing.target))
                for thread_id, span in unfolding.thread_spans:
                    if thread_id == (comp, timing.target):
                        reqs.append(LatencyReq(timing.bound, span, comp, timing.target))
            else:
                target = timing.target
                for caller, service, method, span in unfolding.call_spans:
                    if caller == comp and (service, method) == (target.service, target.method):
                        reqs.append(LatencyReq(timing.bound, span, comp, str(target)))
                if trigger is not None:
                    t_caller, t_ref = trigger
                    if t_caller == comp and (t_ref.service, t_ref.method) == (target.service, target.method):
                        reqs.append(LatencyReq(timing.bound, whole, comp, str(target)))
    return tuple(sorted(reqs, key=lambda r: (r.span, r.bound, r.owner, r.target)))


def build_task_graph(software: SoftwareModel, cfg: Configuration, mode: str) -> TaskGraph:
    """Unfold the configuration's chains for one mode.

    Tasks never activated in the mode simply appear in no chain; a task
    reachable through two different chains (or twice in one) is rejected.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    Pending = tuple[
        str,
        Thread,
        EventModel | None,
        tuple[QualId, int] | None,
        tuple[str, MethodRef] | None,
        frozenset[tuple[str, str, str]],
    ]
    pending: list[Pending] = []
    for comp in sorted(cfg.selected):
        for thread in software.contracts[comp].threads:
            if mode == NORMAL and isinstance(thread.activation, TimeActivation):
                pending.append(
                    (comp, thread, EventModel(thread.activation.period, thread.activation.jitter), None, None, frozenset())
                )
            elif mode == INITIALIZATION and isinstance(thread.activation, Initialization):
                pending.append((comp, thread, None, None, None, frozenset()))

    chains: list[Chain] = []
    seen_tasks: dict[QualId, QualId] = {}
    seen_roots: set[QualId] = set()
    while pending:
        comp, thread, event, triggered_by, trigger, seed_conns = pending.pop(0)
        root = (comp, thread.name)
        if root in seen_roots:
            raise StructuralError(f"thread {qual_str(root)} activated by more than one chain")
        seen_roots.add(root)
        unfolding = _Unfolding()
        unfolding.connections.update(seed_conns)
        _unfold_steps(software, cfg, comp, thread, unfolding, (), root)
        if event is not None and not unfolding.nodes:
            raise StructuralError(f"chain {qual_str(root)}: periodic chain unfolds to no tasks")
        for node in unfolding.nodes:
            prior = seen_tasks.get(node.task_id)
            if prior is not None:
                raise StructuralError(
                    f"task {qual_str(node.task_id)} appears in chain {qual_str(prior)}"
                    f" and chain {qual_str(root)} in {mode} mode"
                )
            seen_tasks[node.task_id] = root
        reqs = _attach_requirements(software, cfg, root, unfolding, trigger)
        connections = frozenset(unfolding.connections)
        chains.append(
            Chain(
                root=root,
                mode=mode,
                nodes=tuple(unfolding.nodes),
                event=event,
                requirements=reqs,
                triggered_by=triggered_by,
                connections_used=connections,
            )
        )
        for provider, entry, caller, ref, position in unfolding.forks:
            trigger_edge = frozenset({(caller, ref.service, provider)})
            pending.append(
                (provider, entry, event, (root, position), (caller, ref), connections | trigger_edge)
            )
    chains.sort(key=lambda c: c.root)
    return TaskGraph(mode, tuple(chains))


def render_chain(chain: Chain) -> str:
    if chain.event is None:
        period, jitter = "-", "-"
    else:
        period, jitter = str(chain.event.period), str(chain.event.jitter)
    body = " -> ".join(str(n) for n in chain.nodes) if chain.nodes else "(empty)"
    return f"chain {qual_str(chain.root)} mode={chain.mode} period={period} jitter={jitter}: {body}"


def render_graph(graph: TaskGraph) -> str:
    out = []
    for chain in graph.chains:
        out.append(render_chain(chain))
        for req in chain.requirements:
            covered = ", ".join(str(n) for n in chain.span_nodes(req.span))
            out.append(f"  {req} over [{covered}]")
    return "\n".join(out) + "\n" if out else ""
