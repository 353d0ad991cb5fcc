#!/usr/bin/env python3
"""Negotiate the bundled lane-assist update under both interference models."""

import argparse
from pathlib import Path

from nego.dsl import load_software_model, parse_contract
from nego.model import SystemModel, UpdateRequest, parse_configuration, parse_platform
from nego.negotiation import negotiate
from nego.timing import MODELS

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def load_system() -> SystemModel:
    texts = [p.read_text() for p in sorted((CORPUS / "contracts").glob("*.contract"))]
    software = load_software_model(texts, (CORPUS / "services.repo").read_text())
    platform = parse_platform((CORPUS / "platform.txt").read_text())
    config = parse_configuration((CORPUS / "current.config").read_text())
    return SystemModel(software, platform, config)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--model", choices=MODELS, help="run a single model instead of both")
    parser.add_argument("--quiet", action="store_true", help="suppress the negotiation trace")
    args = parser.parse_args()

    requests = [
        UpdateRequest.add(parse_contract((CORPUS / "updates" / name).read_text()))
        for name in ("S.contract", "L.contract")
    ]
    system = load_system()
    for model in (args.model,) if args.model else MODELS:
        print(f"=== model {model} ===")
        answer, trace = negotiate(system, requests, model=model)
        if not args.quiet:
            print(trace.text(), end="")
        if answer.ok:
            print("answer: Yes")
            for line in answer.report:
                print("  " + line)
        else:
            print(f"answer: No ({answer.reason})")
        print()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
