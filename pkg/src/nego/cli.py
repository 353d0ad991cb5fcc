"""Command line front end.

Subcommands cover the individual analyses (validate, deps, graph, bound,
simulate) plus the full negotiation.  Exit codes: 0 on success / admitted,
1 when a check fails or the update is refused, 2 on unreadable or invalid
input files.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from nego.controlflow import check_control_flow
from nego.deps import connection_candidates, count_solutions, render_candidates, render_dot
from nego.dsl import DslError, load_software_model, parse_contract
from nego.model import (
    Configuration,
    ModelError,
    SystemModel,
    UpdateRequest,
    check_well_formed,
    parse_configuration,
    parse_platform,
    pinned_components,
    qual_str,
    render_configuration,
    resolve_names,
)
from nego.negotiation import negotiate
from nego.sim import default_horizon, random_scenario, simulate, synchronous_scenario, worst_observed
from nego.taskgraph import INITIALIZATION, NORMAL, GraphError, build_task_graph, render_graph
from nego.timing import BUSY_WINDOW, MODELS, check_timing


def _add_model_args(sub: argparse.ArgumentParser, config_required: bool = False) -> None:
    sub.add_argument("--contracts", required=True, help="directory of *.contract files")
    sub.add_argument("--services", required=True, help="service repository file")
    sub.add_argument("--platform", help="platform description file")
    flag = {"required": True} if config_required else {}
    sub.add_argument("--config", help="current configuration file", **flag)


def _load_software(args):
    texts = []
    directory = Path(args.contracts)
    paths = sorted(directory.glob("*.contract"))
    if not paths:
        raise ModelError(f"no *.contract files in {directory}")
    for path in paths:
        texts.append(path.read_text())
    return load_software_model(texts, Path(args.services).read_text())


def _load_platform(args):
    if not args.platform:
        raise ModelError("--platform is required for this command")
    return parse_platform(Path(args.platform).read_text())


def _load_config(args) -> Configuration | None:
    if not args.config:
        return None
    return parse_configuration(Path(args.config).read_text())


def _parse_request_file(path: Path) -> list[UpdateRequest]:
    requests = []
    for raw in path.read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 1)
        if len(parts) != 2 or parts[0] not in ("add", "update", "remove"):
            raise ModelError(f"bad request line {line!r}")
        kind, rest = parts
        if kind == "remove":
            requests.append(UpdateRequest.remove(rest.strip()))
        else:
            contract = parse_contract((path.parent / rest.strip()).read_text())
            requests.append(getattr(UpdateRequest, kind)(contract))
    return requests


# ---------------------------------------------------------------------------
# Subcommand bodies


def _cmd_validate(args) -> int:
    software = _load_software(args)
    print(f"parsed {len(software.contracts)} contracts, {len(software.interfaces)} services")
    if args.config:
        platform = _load_platform(args)
        config = _load_config(args)
        violations = check_well_formed(config, software, platform)
        for violation in violations:
            print(violation)
        if violations:
            return 1
        print("configuration ok")
    return 0


def _cmd_deps(args) -> int:
    software = _load_software(args)
    pinned = pinned_components(software)
    candidates = connection_candidates(software, pinned)
    if args.dot:
        print(render_dot(candidates), end="")
    else:
        print(render_candidates(candidates), end="")
        print(f"solutions: {count_solutions(candidates, software.interfaces)}")
    return 1 if candidates.unsatisfiable else 0


def _cmd_graph(args) -> int:
    software = _load_software(args)
    config = _load_config(args)
    resolve_names(config, software)
    try:
        graph = build_task_graph(software, config, args.mode)
    except GraphError as exc:
        print(f"structure: {exc}", file=sys.stderr)
        return 1
    print(render_graph(graph), end="")
    return 0


def _cmd_bound(args) -> int:
    software = _load_software(args)
    platform = _load_platform(args)
    config = _load_config(args)
    resolve_names(config, software, platform)
    ok = True
    for mode in (NORMAL, INITIALIZATION):
        try:
            graph = build_task_graph(software, config, mode)
        except GraphError as exc:
            print(f"structure ({mode}): {exc}", file=sys.stderr)
            return 1
        report = check_timing(graph, config, platform, args.model)
        print(f"[{mode}]")
        for line in report.lines():
            print(line)
        ok = ok and report.ok
    return 0 if ok else 1


def _cmd_simulate(args) -> int:
    software = _load_software(args)
    config = _load_config(args)
    resolve_names(config, software)
    try:
        graph = build_task_graph(software, config, args.mode)
    except GraphError as exc:
        print(f"structure: {exc}", file=sys.stderr)
        return 1
    horizon = args.horizon or default_horizon(graph)
    if args.sweep:
        maxima = worst_observed(graph, config, horizon)
    else:
        if args.seed is not None:
            scenario = random_scenario(graph, random.Random(args.seed), horizon)
        else:
            scenario = synchronous_scenario(graph, horizon)
        result = simulate(graph, config, scenario, trace=args.trace)
        for line in result.trace:
            print(line)
        if result.partial:
            print("warning: some activations ran past the horizon", file=sys.stderr)
        maxima = result.maxima()
    for (root, span), value in sorted(maxima.items(), key=lambda kv: (qual_str(kv[0][0]), kv[0][1])):
        print(f"observed {qual_str(root)}[{span[0]}:{span[1]}] = {value}")
    return 0


def _cmd_negotiate(args) -> int:
    software = _load_software(args)
    platform = _load_platform(args)
    config = _load_config(args)
    system = SystemModel(software, platform, config)
    requests = _parse_request_file(Path(args.request))
    answer, trace = negotiate(system, requests, model=args.model)

    if answer.ok:
        answer_line = "Yes"
    else:
        answer_line = f"No: {answer.reason}"
    print(answer_line)
    if answer.ok:
        for line in answer.report:
            print(line)

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "answer.txt").write_text(answer_line + "\n")
        (out / "trace.txt").write_text(trace.text())
        if answer.ok:
            (out / "report.txt").write_text("\n".join(answer.report) + "\n")
            (out / "config.txt").write_text(render_configuration(answer.config))
            if answer.previous is not None:
                (out / "previous.config").write_text(render_configuration(answer.previous))
    elif args.trace:
        print(trace.text(), end="")
    return 0 if answer.ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nego", description="contract negotiation for software updates")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("validate", help="parse contracts and optionally check a configuration")
    _add_model_args(sub)
    sub.set_defaults(func=_cmd_validate)

    sub = subs.add_parser("deps", help="show connection candidates and solution count")
    _add_model_args(sub)
    sub.add_argument("--dot", action="store_true", help="emit graphviz instead of text")
    sub.set_defaults(func=_cmd_deps)

    sub = subs.add_parser("graph", help="print the unfolded task chains of a configuration")
    _add_model_args(sub, config_required=True)
    sub.add_argument("--mode", choices=(NORMAL, INITIALIZATION), default=NORMAL)
    sub.set_defaults(func=_cmd_graph)

    sub = subs.add_parser("bound", help="check utilization and latency bounds")
    _add_model_args(sub, config_required=True)
    sub.add_argument("--model", choices=MODELS, default=BUSY_WINDOW)
    sub.set_defaults(func=_cmd_bound)

    sub = subs.add_parser("simulate", help="run the discrete-event scheduler")
    _add_model_args(sub, config_required=True)
    sub.add_argument("--mode", choices=(NORMAL, INITIALIZATION), default=NORMAL)
    sub.add_argument("--horizon", type=int)
    sub.add_argument("--seed", type=int, help="random offsets and jitter draws")
    sub.add_argument("--sweep", action="store_true", help="grid of offsets, report worst case")
    sub.add_argument("--trace", action="store_true")
    sub.set_defaults(func=_cmd_simulate)

    sub = subs.add_parser("negotiate", help="negotiate an update request")
    _add_model_args(sub)
    sub.add_argument("--request", required=True, help="file of add/update/remove lines")
    sub.add_argument("--model", choices=MODELS, default=BUSY_WINDOW)
    sub.add_argument("--out", help="directory for answer, trace, report and configuration")
    sub.add_argument("--trace", action="store_true", help="print the trace when no --out is given")
    sub.set_defaults(func=_cmd_negotiate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DslError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
