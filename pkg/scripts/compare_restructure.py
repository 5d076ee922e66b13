#!/usr/bin/env python3
"""Compare the two deferred maintenance pass orders on fully-deleted trees.

Builds perfect trees of N = 2^k - 1 keys, deletes every key logically, then
runs the post-order ("fixed") and pre-order ("legacy") restructure to a fixed
point, printing passes / node visits / physical removals for each.
"""

import argparse
import sys

from skewbench.structures import DeferredBST, restructure_fixed, restructure_legacy


def build_perfect(n: int, legacy: bool) -> DeferredBST:
    tree = DeferredBST(legacy=legacy, start_daemon=False)
    order: list[int] = []

    def emit(lo: int, hi: int) -> None:
        if lo > hi:
            return
        mid = (lo + hi) // 2
        order.append(mid)
        emit(lo, mid - 1)
        emit(mid + 1, hi)

    emit(0, n - 1)
    for k in order:
        tree.put_if_absent(k, k)
    for k in order:
        tree.remove(k)
    return tree


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-depth", type=int, default=10, help="largest tree is 2^max_depth - 1 keys")
    args = parser.parse_args()

    print(f"{'N':>6} {'fixed passes':>13} {'fixed visits':>13} {'legacy passes':>14} {'legacy visits':>14} {'ratio':>6}")
    for depth in range(3, args.max_depth + 1):
        n = 2**depth - 1
        fixed = restructure_fixed(build_perfect(n, legacy=False))
        legacy = restructure_legacy(build_perfect(n, legacy=True))
        assert fixed.physical_removals == legacy.physical_removals == n
        print(
            f"{n:>6} {fixed.calls:>13} {fixed.visits:>13} {legacy.calls:>14} {legacy.visits:>14} "
            f"{legacy.visits / fixed.visits:>6.2f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
