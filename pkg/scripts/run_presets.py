#!/usr/bin/env python3
"""Run every experiment preset at desk scale and collect one CSV.

Example:
    python3 scripts/run_presets.py --out results.csv --max-range 8192 \
        --duration-ms 1000 --repeats 3
"""

import argparse
import sys
import time
from dataclasses import replace

from skewbench.runner import (
    STRUCTURE_IDS,
    ResultRow,
    list_presets,
    run_experiment,
    scale_to_range,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results.csv", help="CSV output path (appended across presets)")
    parser.add_argument("--max-range", type=int, default=8192, help="cap on the key range (0 = no cap)")
    parser.add_argument("--duration-ms", type=int, default=1000)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--threads", default="1,2,4,8", help="comma list of thread counts")
    parser.add_argument("--structures", default=",".join(STRUCTURE_IDS), help="comma list of structures")
    parser.add_argument("--preset", action="append", help="run only the named preset (repeatable)")
    args = parser.parse_args()

    threads = tuple(int(t) for t in args.threads.split(","))
    structures = tuple(args.structures.split(","))
    presets = list_presets()
    names = args.preset or sorted(presets)
    unknown = [n for n in names if n not in presets]
    if unknown:
        parser.error(f"unknown preset(s): {', '.join(unknown)}")

    def progress(row: ResultRow) -> None:
        print(
            f"  {row.structure:>20} t={row.threads} rep={row.repeat}: "
            f"{row.throughput_ops_per_sec:>12.0f} ops/s [{row.status}]"
        )

    start = time.perf_counter()
    failed = 0
    for name in names:
        config = replace(
            presets[name],
            structures=structures,
            threads=threads,
            duration_ms=args.duration_ms,
            repeats=args.repeats,
            out=args.out,
        )
        if args.max_range:
            config = scale_to_range(config, args.max_range)
        print(f"== {name} (range {config.key_range}) ==")
        rows = run_experiment(config, progress=progress)
        failed += sum(1 for r in rows if r.status != "ok")
    print(f"done in {time.perf_counter() - start:.0f}s; results appended to {args.out}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
