"""Aggregate benchmark result CSVs and render throughput-vs-threads figures.

Consumes the result CSV emitted by the benchmark runner. Only four columns
are interpreted — ``config``, ``structure``, ``threads``,
``throughput_ops_per_sec`` — plus ``status`` when present (rows whose status
is not ``ok`` are excluded from the means). Extra columns are ignored, so the
format may grow without breaking this tool.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass
from statistics import mean

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402 - backend must be set first

REQUIRED_COLUMNS = ("config", "structure", "threads", "throughput_ops_per_sec")


class PlotError(ValueError):
    """Malformed input or an empty selection."""


@dataclass(frozen=True)
class ResultPoint:
    config: str
    structure: str
    threads: int
    throughput: float


def load_rows(path: str) -> list[ResultPoint]:
    """Parse a result CSV; malformed rows raise PlotError naming the line."""
    points: list[ResultPoint] = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise PlotError(f"{path}:1: missing column(s): {', '.join(missing)}")
        for rec in reader:
            line = reader.line_num
            if any(rec.get(c) in (None, "") for c in REQUIRED_COLUMNS):
                raise PlotError(f"{path}:{line}: incomplete row")
            if rec.get("status", "ok") != "ok":
                continue
            try:
                points.append(
                    ResultPoint(
                        config=rec["config"],
                        structure=rec["structure"],
                        threads=int(rec["threads"]),
                        throughput=float(rec["throughput_ops_per_sec"]),
                    )
                )
            except ValueError as exc:
                raise PlotError(f"{path}:{line}: {exc}") from None
    return points


def aggregate_means(points: list[ResultPoint], config: str) -> dict[str, list[tuple[int, float, int]]]:
    """Mean throughput per (structure, threads) for one configuration.

    Returns ``{structure: [(threads, mean_throughput, samples), ...]}`` with
    structures in lexical order and thread counts ascending.
    """
    selected = [p for p in points if p.config == config]
    if not selected:
        raise PlotError(f"no rows match configuration {config!r}")
    buckets: dict[tuple[str, int], list[float]] = {}
    for p in selected:
        buckets.setdefault((p.structure, p.threads), []).append(p.throughput)
    out: dict[str, list[tuple[int, float, int]]] = {}
    for structure in sorted({s for s, _ in buckets}):
        series = [
            (threads, mean(buckets[(structure, threads)]), len(buckets[(structure, threads)]))
            for (s, threads) in sorted(buckets)
            if s == structure
        ]
        out[structure] = series
    return out


def write_means_csv(path: str, config: str, means: dict[str, list[tuple[int, float, int]]]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["config", "structure", "threads", "mean_throughput_ops_per_sec", "samples"])
        for structure, series in means.items():
            for threads, value, samples in series:
                writer.writerow([config, structure, threads, f"{value:.3f}", samples])


def render(means: dict[str, list[tuple[int, float, int]]], config: str, out_path: str) -> None:
    """One line per structure, throughput against thread count."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for structure, series in means.items():  # already in lexical order
        xs = [threads for threads, _, _ in series]
        ys = [value for _, value, _ in series]
        ax.plot(xs, ys, marker="o", label=structure)
    ax.set_xlabel("threads")
    ax.set_ylabel("ops/s")
    ax.set_title(config)
    ax.set_xticks(sorted({t for series in means.values() for t, _, _ in series}))
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def _means_path(out_path: str) -> str:
    base, _ = os.path.splitext(out_path)
    return base + ".means.csv"


def plot_config(points: list[ResultPoint], config: str, out_path: str) -> str:
    """Render one figure plus its mean table; returns the mean-table path."""
    means = aggregate_means(points, config)
    render(means, config, out_path)
    means_path = _means_path(out_path)
    write_means_csv(means_path, config, means)
    return means_path


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="benchplot",
        description="Render throughput-vs-threads figures from a benchmark result CSV.",
    )
    parser.add_argument("--csv", required=True, help="result CSV produced by the benchmark runner")
    parser.add_argument("--preset", help="configuration name to plot (the CSV's 'config' column)")
    parser.add_argument("--all", action="store_true", help="plot every configuration found in the CSV")
    parser.add_argument("--out", required=True,
                        help="output image path (.png/.svg); with --all, a directory")
    args = parser.parse_args(argv)
    if bool(args.preset) == bool(args.all):
        parser.error("exactly one of --preset or --all is required")
    try:
        points = load_rows(args.csv)
        if args.all:
            configs = sorted({p.config for p in points})
            if not configs:
                raise PlotError(f"no usable rows in {args.csv}")
            os.makedirs(args.out, exist_ok=True)
            for config in configs:
                out_path = os.path.join(args.out, f"{config}.png")
                means_path = plot_config(points, config, out_path)
                print(f"wrote {out_path} and {means_path}")
        else:
            means_path = plot_config(points, args.preset, args.out)
            print(f"wrote {args.out} and {means_path}")
    except (PlotError, OSError) as exc:
        print(f"benchplot: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
