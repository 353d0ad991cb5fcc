"""Random system generators for property testing.

Two flavours:

* `random_chain_system` builds a fully configured system of independent
  periodic chains (one thread per component, no services) whose total
  utilization is at most one.  Used to compare analytic latency bounds
  against simulated schedules.
* `random_software_system` builds a small unconfigured software model with
  services, RPC entry threads, optional ordering rules and timing
  requirements.  Used to compare the negotiation verdict against
  brute-force search.
"""

from __future__ import annotations

import random
from fractions import Fraction

from nego.dsl import load_software_model
from nego.model import Configuration, PlatformModel, Resource, SystemModel

CHAIN_PERIOD_POOLS = {
    1: (5, 8, 10, 20),
    2: (5, 8, 10, 20),
    3: (4, 5, 8, 10),
    4: (4, 5),
}

MAX_CHAIN_TASKS = 6


def _chain_contract(name: str, period: int, jitter: int, wcets: list[int], bcets: list[int]) -> str:
    lines = [f"component {name}", "  threads"]
    lines.append(f"    thread work on time (period={period} jitter={jitter})")
    for i, (w, b) in enumerate(zip(wcets, bcets)):
        lines.append(f"      task t{i} onto CPU wcet={w} bcet={b}")
    return "\n".join(lines) + "\n"


def random_chain_system(rng: random.Random) -> SystemModel:
    for _ in range(200):
        n = rng.randint(1, 4)
        pool = CHAIN_PERIOD_POOLS[n]
        periods = [rng.choice(pool) for _ in range(n)]
        counts = []
        left = MAX_CHAIN_TASKS
        for i in range(n):
            hi = min(3, left - (n - i - 1))
            counts.append(rng.randint(1, max(1, hi)))
            left -= counts[-1]
        wcets = [[rng.randint(1, 3) for _ in range(c)] for c in counts]
        total = sum(Fraction(sum(ws), p) for ws, p in zip(wcets, periods))
        if total > 1:
            continue
        bcets = [[rng.randint(1, w) for w in ws] for ws in wcets]
        jitters = [rng.randint(0, min(3, p - 1)) for p in periods]
        texts = {}
        for i in range(n):
            name = f"C{i + 1}"
            texts[name] = _chain_contract(name, periods[i], jitters[i], wcets[i], bcets[i])
        software = load_software_model(texts.values(), "")
        n_res = 2 if rng.random() < 0.3 else 1
        platform = PlatformModel(tuple(Resource(f"R{i + 1}", "CPU") for i in range(n_res)))
        mapping = {}
        for name, contract in software.contracts.items():
            for thread in contract.threads:
                for task in thread.tasks():
                    mapping[(name, task.name)] = rng.choice(platform.resources).name
        threads = [(name, t.name) for name, c in software.contracts.items() for t in c.threads]
        rng.shuffle(threads)
        cfg = Configuration(frozenset(texts), frozenset(), mapping, tuple(threads))
        return SystemModel(software, platform, cfg)
    raise RuntimeError("generator failed to fit utilization budget")


# ---------------------------------------------------------------------------
# Random software models for negotiation-vs-brute-force comparison


def _method_sig(rng: random.Random) -> str:
    return rng.choice(["", "int value", "int x, int y"])


def random_software_system(rng: random.Random) -> SystemModel:
    """Unconfigured model: services, RPC entry threads, client calls,
    sometimes ordering rules, init threads and method timings."""
    n_services = rng.randint(1, 3)
    services: dict[str, tuple[dict[str, str], int | None]] = {}
    for i in range(n_services):
        methods = {f"m{j}": _method_sig(rng) for j in range(rng.randint(1, 2))}
        max_clients = rng.choice([None, None, None, 1, 2])
        services[f"s{i}"] = (methods, max_clients)

    repo_lines = []
    for sname, (methods, max_clients) in services.items():
        head = f"service {sname}"
        if max_clients is not None:
            head += f" max_clients {max_clients}"
        repo_lines.append(head)
        for mname, sig in methods.items():
            repo_lines.append(f"  method {mname} ({sig})")
    repo_text = "\n".join(repo_lines) + "\n"

    n_components = rng.randint(1, 4)
    names = [f"C{i + 1}" for i in range(n_components)]
    comp_provides: dict[str, list[str]] = {}
    comp_requires: dict[str, list[str]] = {}
    for name in names:
        provides = [s for s in services if rng.random() < 0.4]
        comp_provides[name] = provides
        comp_requires[name] = [s for s in services if s not in provides and rng.random() < 0.35]

    total_threads = 0
    texts = []
    for name in names:
        lines = [f"component {name}"]
        if comp_requires[name] or comp_provides[name]:
            lines.append("  services")
            for s in comp_requires[name]:
                lines.append(f"    requires {s}")
            for s in comp_provides[name]:
                lines.append(f"    provides {s}")

        thread_lines: list[str] = []
        own_threads: list[str] = []
        calls: list[tuple[str, str]] = []
        tasknum = 0
        for s in comp_provides[name]:
            for mname, sig in services[s][0].items():
                if total_threads >= 5:
                    break
                if rng.random() < 0.8:
                    tname = f"{s}_{mname}"
                    thread_lines.append(f"    thread {tname} on RPC {s}.{mname}({sig})")
                    w = rng.randint(1, 3)
                    thread_lines.append(
                        f"      task e{tasknum} onto CPU wcet={w} bcet={rng.randint(1, w)}"
                    )
                    own_threads.append(tname)
                    tasknum += 1
                    total_threads += 1
        if total_threads < 5 and rng.random() < 0.8:
            if rng.random() < 0.25:
                tname = "boot"
                thread_lines.append("    thread boot on initialization")
            else:
                tname = "main"
                period = rng.choice([5, 10, 20])
                jitter = rng.randint(0, 2)
                thread_lines.append(f"    thread main on time (period={period} jitter={jitter})")
            own_threads.append(tname)
            w = rng.randint(1, 3)
            thread_lines.append(f"      task t{tasknum} onto CPU wcet={w} bcet={rng.randint(1, w)}")
            tasknum += 1
            if comp_requires[name] and rng.random() < 0.7:
                s = rng.choice(comp_requires[name])
                mname = rng.choice(sorted(services[s][0]))
                thread_lines.append(f"      RPC {s}.{mname}({services[s][0][mname]})")
                calls.append((s, mname))
                if rng.random() < 0.5:
                    w = rng.randint(1, 2)
                    thread_lines.append(f"      task t{tasknum} onto CPU wcet={w} bcet=1")
                    tasknum += 1
            total_threads += 1
        if thread_lines:
            lines.append("  threads")
            lines.extend(thread_lines)

        timing_lines = []
        if own_threads and rng.random() < 0.5:
            bound = rng.choice([3, 5, 8, 10, 15, 20, 30])
            timing_lines.append(f"    timing {bound} {rng.choice(own_threads)}")
        if calls and rng.random() < 0.4:
            s, mname = rng.choice(calls)
            bound = rng.choice([3, 5, 10, 20])
            timing_lines.append(f"    timing {bound} {s}.{mname}()")
        if timing_lines:
            lines.append("  timings")
            lines.extend(timing_lines)

        known = comp_requires[name] + comp_provides[name]
        if len(known) >= 2 and rng.random() < 0.3:
            a, b = rng.sample(known, 2)
            ma = rng.choice(sorted(services[a][0]))
            mb = rng.choice(sorted(services[b][0]))
            lines.append("  control_flow")
            lines.append(f"    not {a}.{ma}() until {b}.{mb}()")
        texts.append("\n".join(lines) + "\n")

    software = load_software_model(texts, repo_text)
    n_res = 2 if rng.random() < 0.2 else 1
    platform = PlatformModel(tuple(Resource(f"R{i + 1}", "CPU") for i in range(n_res)))
    return SystemModel(software, platform, None)
