#!/usr/bin/env python3
"""Check the busy-window bound against simulated worst cases on random systems."""

import argparse
import random

from nego.randsys import random_chain_system
from nego.sim import worst_observed
from nego.taskgraph import NORMAL, build_task_graph
from nego.timing import BUSY_WINDOW, SINGLE_BLOCKING, chain_latency_bound


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--systems", type=int, default=300)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    spans = violations = 0
    for index in range(args.systems):
        system = random_chain_system(random.Random(args.seed + index))
        graph = build_task_graph(system.software, system.config, NORMAL)
        cfg = system.config
        ranks = cfg.ranks()
        for (root, span), seen in worst_observed(graph, cfg).items():
            chain = graph.chain(root)
            busy = chain_latency_bound(chain, span, graph, cfg, ranks, BUSY_WINDOW)
            single = chain_latency_bound(chain, span, graph, cfg, ranks, SINGLE_BLOCKING)
            spans += 1
            if busy is not None and seen > busy:
                violations += 1
                print(f"UNSOUND seed={args.seed + index} {root} {span}: observed {seen} > bound {busy}")
            if busy is not None and single is not None and busy < single:
                violations += 1
                print(f"ORDER seed={args.seed + index} {root} {span}: busy {busy} < single {single}")
    print(f"{args.systems} systems, {spans} spans, {violations} violations")
    return 1 if violations else 0


if __name__ == "__main__":
    raise SystemExit(main())
