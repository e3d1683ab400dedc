"""Recompute the golden reports, refusing to overwrite unless every invariant is unchanged.

    python scripts/regenerate_golden.py [--force]
"""

import argparse
import json

from iwalab.cli import dumps
from iwalab.experiments import EXAMPLES, data_path, invariant_summary


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--force", action="store_true", help="write even if certified invariants changed")
    args = ap.parse_args()
    for name, run in EXAMPLES.items():
        text = dumps(run())
        path = data_path("golden") / f"{name}.json"
        if path.exists() and not args.force:
            old = invariant_summary(json.loads(path.read_text()))
            new = invariant_summary(json.loads(text))
            if old != new:
                raise SystemExit(f"{name}: invariants changed {old} -> {new}; rerun with --force")
        path.write_text(text)
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
