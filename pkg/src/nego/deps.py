"""Dependency resolution: which provider can serve which required service.

Works on the transitive closure of components reachable from the pinned set:
a provider's own requirements join the problem only in solutions where it is
chosen, but the candidate summary covers every component any choice could
pull in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from nego.dsl import ServiceInterface, SoftwareModel
from nego.model import ModelError


@dataclass(frozen=True)
class ConnectionCandidates:
    """Provider options per (client, service) pair over the reachable set.

    must: pairs with exactly one provider, as (client, service, provider).
    may: pairs with several providers, mapped to the sorted provider tuple.
    unsatisfiable: pairs with no provider at all.
    requirements/providers describe the reachable sub-model so solutions can
    be enumerated without going back to the full software model.
    """

    pinned: frozenset[str]
    must: frozenset[tuple[str, str, str]]
    may: Mapping[tuple[str, str], tuple[str, ...]]
    unsatisfiable: frozenset[tuple[str, str]]
    requirements: Mapping[str, tuple[str, ...]]
    providers: Mapping[str, tuple[str, ...]]


def connection_candidates(software: SoftwareModel, pinned: frozenset[str]) -> ConnectionCandidates:
    for comp in pinned:
        if comp not in software.contracts:
            raise ModelError(f"pinned component {comp!r} does not exist")

    reachable: set[str] = set()
    agenda = sorted(pinned)
    while agenda:
        comp = agenda.pop()
        if comp in reachable:
            continue
        reachable.add(comp)
        for service in sorted(software.contracts[comp].requires):
            for provider in software.providers(service):
                if provider != comp and provider not in reachable:
                    agenda.append(provider)

    must: set[tuple[str, str, str]] = set()
    may: dict[tuple[str, str], tuple[str, ...]] = {}
    unsat: set[tuple[str, str]] = set()
    requirements: dict[str, tuple[str, ...]] = {}
    providers: dict[str, tuple[str, ...]] = {}
    for comp in sorted(reachable):
        services = tuple(sorted(software.contracts[comp].requires))
        requirements[comp] = services
        for service in services:
            options = tuple(p for p in software.providers(service) if p != comp)
            providers.setdefault(service, options)
            if not options:
                unsat.add((comp, service))
            elif len(options) == 1:
                must.add((comp, service, options[0]))
            else:
                may[(comp, service)] = options
    return ConnectionCandidates(
        pinned=frozenset(pinned),
        must=frozenset(must),
        may=may,
        unsatisfiable=frozenset(unsat),
        requirements=requirements,
        providers=providers,
    )


def count_solutions(
    candidates: ConnectionCandidates, interfaces: Mapping[str, ServiceInterface]
) -> int:
    """Number of complete connection assignments honouring client bounds.

    Requirements expand lazily: a provider's pairs count only once some
    branch actually selects it.
    """
    if any(pair[0] in candidates.pinned for pair in candidates.unsatisfiable):
        return 0

    def options(client: str, service: str) -> tuple[str, ...]:
        return tuple(p for p in candidates.providers.get(service, ()) if p != client)

    def recurse(selected: frozenset[str], assigned: dict[tuple[str, str], str]) -> int:
        pending = sorted(
            (client, service)
            for client in selected
            for service in candidates.requirements.get(client, ())
            if (client, service) not in assigned
        )
        if not pending:
            return 1
        client, service = pending[0]
        total = 0
        for provider in options(client, service):
            bound = interfaces[service].max_clients if service in interfaces else None
            if bound is not None:
                clients = sum(1 for (c, s), p in assigned.items() if s == service and p == provider)
                if clients + 1 > bound:
                    continue
            assigned[(client, service)] = provider
            total += recurse(selected | {provider}, assigned)
            del assigned[(client, service)]
        return total

    return recurse(candidates.pinned, {})


def render_candidates(candidates: ConnectionCandidates) -> str:
    out = []
    for client, service, provider in sorted(candidates.must):
        out.append(f"must {client} {service} {provider}")
    for (client, service), options in sorted(candidates.may.items()):
        out.append(f"may {client} {service} {'|'.join(options)}")
    for client, service in sorted(candidates.unsatisfiable):
        out.append(f"unsatisfiable {client} {service}")
    return "\n".join(out) + "\n" if out else ""


def render_dot(candidates: ConnectionCandidates) -> str:
    """Graph description of the dependency options for external rendering."""
    lines = ["digraph dependencies {"]
    comps = sorted(candidates.requirements)
    for comp in comps:
        shape = "box" if comp in candidates.pinned else "ellipse"
        lines.append(f'  "{comp}" [shape={shape}];')
    for client, service, provider in sorted(candidates.must):
        lines.append(f'  "{client}" -> "{provider}" [label="{service}"];')
    for (client, service), options in sorted(candidates.may.items()):
        for provider in options:
            lines.append(f'  "{client}" -> "{provider}" [label="{service}" style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"
