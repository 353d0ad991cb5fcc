"""Control-flow admission: provider-stated call ordering over a configuration.

A provider may require that one of its methods is never reached before
another has been called.  Calls made during initialization mode complete
before normal mode starts, so an initialization-mode call of the
prerequisite satisfies the ordering for every normal-mode caller.  Ordering
between distinct initialization chains is not defined, so an
initialization-mode call of the forbidden method is only admitted when the
same thread calls the prerequisite in an earlier step.
"""

from __future__ import annotations

from dataclasses import dataclass

from nego.constraints import ConnLit, ForbidConjunction, SelLit
from nego.dsl import Initialization, MethodRef, SoftwareModel, TimeActivation
from nego.model import Configuration, QualId
from nego.taskgraph import INITIALIZATION, NORMAL


@dataclass(frozen=True)
class CallSite:
    """One call step of a selected component, with the modes its thread
    can execute in and the provider the configuration routes it to."""

    client: str
    thread: str
    index: int
    ref: MethodRef
    provider: str
    modes: frozenset[str]


def thread_modes(software: SoftwareModel, cfg: Configuration) -> dict[QualId, frozenset[str]]:
    """Modes each selected thread executes in: activation mode plus every
    mode of every caller, propagated to a fixpoint through connections."""
    modes: dict[QualId, set[str]] = {}
    for comp in cfg.selected:
        for thread in software.contracts[comp].threads:
            base: set[str] = set()
            if isinstance(thread.activation, TimeActivation):
                base.add(NORMAL)
            elif isinstance(thread.activation, Initialization):
                base.add(INITIALIZATION)
            modes[(comp, thread.name)] = base
    changed = True
    while changed:
        changed = False
        for comp in cfg.selected:
            for thread in software.contracts[comp].threads:
                source = modes[(comp, thread.name)]
                if not source:
                    continue
                for _, call in thread.calls():
                    provider = cfg.provider_of(comp, call.ref.service)
                    if provider is None:
                        continue
                    entry = software.contracts[provider].entry_thread(call.ref.service, call.ref.method)
                    if entry is None:
                        continue
                    target = modes[(provider, entry.name)]
                    if not source <= target:
                        target.update(source)
                        changed = True
    return {key: frozenset(value) for key, value in modes.items()}


def call_sites(software: SoftwareModel, cfg: Configuration) -> list[CallSite]:
    modes = thread_modes(software, cfg)
    sites: list[CallSite] = []
    for comp in sorted(cfg.selected):
        for thread in software.contracts[comp].threads:
            executing = modes[(comp, thread.name)]
            if not executing:
                continue
            for index, call in thread.calls():
                provider = cfg.provider_of(comp, call.ref.service)
                if provider is None:
                    continue
                sites.append(CallSite(comp, thread.name, index, call.ref, provider, executing))
    return sites


@dataclass(frozen=True)
class CfViolation:
    provider: str
    forbidden: MethodRef
    prerequisite: MethodRef
    client: str
    thread: str
    mode: str
    feedback: ForbidConjunction

    def message(self) -> str:
        return (
            f"control_flow: {self.provider}.{self.forbidden.service}.{self.forbidden.method}"
            f" reachable before {self.prerequisite.method} via {self.client}/{self.thread}"
        )


def _matches(ref: MethodRef, target: MethodRef) -> bool:
    return (ref.service, ref.method) == (target.service, target.method)


def _earlier_prerequisite(
    software: SoftwareModel,
    cfg: Configuration,
    site: CallSite,
    prerequisite: MethodRef,
) -> tuple[bool, str | None]:
    """Whether the calling thread itself calls the prerequisite in an
    earlier step.  Returns (found, provider it is routed to)."""
    thread = software.contracts[site.client].thread(site.thread)
    for index, call in thread.calls():
        if index >= site.index:
            break
        if _matches(call.ref, prerequisite):
            return True, cfg.provider_of(site.client, prerequisite.service)
    return False, None


def _unselected_initializers(software: SoftwareModel, cfg: Configuration, prerequisite: MethodRef) -> list[str]:
    """Components not selected whose contract would call the prerequisite
    from an initialization thread if they were."""
    found = []
    for name in software.component_names():
        if name in cfg.selected:
            continue
        for thread in software.contracts[name].threads:
            if not isinstance(thread.activation, Initialization):
                continue
            if any(_matches(call.ref, prerequisite) for _, call in thread.calls()):
                found.append(name)
                break
    return found


def check_control_flow(software: SoftwareModel, cfg: Configuration) -> list[CfViolation]:
    sites = call_sites(software, cfg)
    violations: list[CfViolation] = []
    seen: set[tuple] = set()
    for provider in sorted(cfg.selected):
        for req in software.contracts[provider].control_flow:
            forbidden, prerequisite = req.forbidden, req.prerequisite
            initializer_sites = [
                s
                for s in sites
                if _matches(s.ref, prerequisite) and s.provider == provider and INITIALIZATION in s.modes
            ]
            for site in sites:
                if not _matches(site.ref, forbidden) or site.provider != provider:
                    continue
                found_earlier, earlier_route = _earlier_prerequisite(software, cfg, site, prerequisite)
                if found_earlier and earlier_route == provider:
                    continue
                for mode in sorted(site.modes):
                    if mode == NORMAL and initializer_sites:
                        continue
                    key = (provider, str(forbidden), str(prerequisite), site.client, site.thread, mode)
                    if key in seen:
                        continue
                    seen.add(key)
                    literals: set = {ConnLit(site.client, forbidden.service, provider)}
                    if found_earlier and earlier_route is not None and earlier_route != provider:
                        literals.add(ConnLit(site.client, prerequisite.service, earlier_route))
                    if mode == NORMAL:
                        for other in sites:
                            if (
                                _matches(other.ref, prerequisite)
                                and INITIALIZATION in other.modes
                                and other.provider != provider
                            ):
                                literals.add(ConnLit(other.client, prerequisite.service, other.provider))
                        for dormant in _unselected_initializers(software, cfg, prerequisite):
                            literals.add(SelLit(dormant, False))
                    violations.append(
                        CfViolation(
                            provider=provider,
                            forbidden=forbidden,
                            prerequisite=prerequisite,
                            client=site.client,
                            thread=site.thread,
                            mode=mode,
                            feedback=ForbidConjunction(frozenset(literals)),
                        )
                    )
    violations.sort(key=lambda v: (v.provider, str(v.forbidden), v.client, v.thread, v.mode))
    return violations
