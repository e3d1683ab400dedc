"""Run the worked examples and print a compact summary of their invariants.

    python scripts/run_examples.py [--example example1|example2|nonprimitive] [--n-offset 1] [--out DIR]
"""

import argparse
import json
import time
from pathlib import Path

from iwalab.cli import dumps
from iwalab.experiments import EXAMPLES, ExampleConfig, invariant_summary


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--example", choices=sorted(EXAMPLES), action="append")
    ap.add_argument("--n-offset", type=int, default=0)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()
    for name in args.example or list(EXAMPLES):
        start = time.perf_counter()
        report = EXAMPLES[name](ExampleConfig(n_offset=args.n_offset))
        elapsed = time.perf_counter() - start
        print(f"{name} ({elapsed:.1f}s)")
        for key, value in invariant_summary(report).items():
            print(f"  {key}: {json.dumps(value)}")
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / f"{name}.json").write_text(dumps(report))


if __name__ == "__main__":
    main()
