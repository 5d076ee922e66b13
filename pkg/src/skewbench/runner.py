"""CLI orchestration: parsing, prefill -> warmup -> measured phase, presets, CSV."""

from __future__ import annotations

import argparse
import csv
import hashlib
import os
import sys
import threading
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from skewbench.core import BenchmarkParameters, seeded_rng
from skewbench.distributions import build_distribution
from skewbench.keygen import (
    KEYGEN_IDS,
    CreakersWaveKeyGenerator,
    CreakersWaveParameters,
    CreakersWaveShared,
    DefaultKeyGenerator,
    KeyGenerator,
    LastRemovedCell,
    LeafsHandshakeKeyGenerator,
    LeafsHandshakeParameters,
    SkewedSetsKeyGenerator,
    SkewedSetsParameters,
    TemporarySkewedKeyGenerator,
    TemporarySkewedParameters,
)
from skewbench.keygen_data import KeyGeneratorData
from skewbench.structures import STRUCTURE_IDS, build_structure
from skewbench.threadloop import (
    THREADLOOP_IDS,
    DefaultThreadLoop,
    OperationMix,
    TemporaryOperationsParameters,
    TemporaryOperationsThreadLoop,
    ThreadLoop,
    run_measured_phase,
    run_prefill,
)


class UsageError(ValueError):
    """A parameter constraint violation with a user-facing message."""


@dataclass(frozen=True)
class RunConfig:
    """Full experiment configuration: one keygen + threadloop + parameter
    bundle, run over a list of structures and thread counts."""

    name: str = "custom"
    structures: tuple[str, ...] = STRUCTURE_IDS
    keygen: str = "default"
    threadloop: str = "default"
    key_range: int = 10_000
    initial_size: Optional[int] = None  # None -> derived (range/2 or creakers+wave)
    threads: tuple[int, ...] = (1, 2, 4, 8)
    prefill_threads: int = 2
    duration_ms: int = 1000
    seed: int = 42
    repeats: int = 1
    non_shuffle: bool = False
    # default keygen
    distribution: str = "uniform"
    hot_prob: float = 0.0
    hot_size: float = 0.0
    alpha: float = 1.0
    # skewed sets
    read_hot_prob: float = 0.9
    read_hot_size: float = 0.1
    write_hot_prob: float = 0.9
    write_hot_size: float = 0.1
    inter: float = 0.0
    # temporary skewed
    state_count: int = 1
    hot_probs: tuple[float, ...] = (0.9,)
    hot_sizes: tuple[float, ...] = (0.1,)
    hot_time: int = 1000
    relax_time: int = 1000
    hot_times: Optional[tuple[int, ...]] = None
    relax_times: Optional[tuple[int, ...]] = None
    # creakers and wave
    creaker_prob: float = 0.0
    creaker_size: float = 0.0
    wave_size: float = 0.1
    creaker_age: int = 0
    wave_alpha: float = 1.0
    # leafs handshake
    insert_alpha: float = 1.0
    insert_window: int = 100
    per_thread_handshake: bool = False
    # default loop
    insert_frac: float = 0.1
    remove_frac: float = 0.1
    # temporary operations loop
    oper_durations: tuple[int, ...] = (1000,)
    insert_fracs: tuple[float, ...] = (0.1,)
    remove_fracs: tuple[float, ...] = (0.1,)
    # output
    out: Optional[str] = None

    def config_hash(self) -> str:
        payload = repr(sorted((f.name, getattr(self, f.name)) for f in fields(self) if f.name != "out"))
        return hashlib.sha256(payload.encode()).hexdigest()[:10]


RESULT_FIELDS = (
    "config",
    "structure",
    "threads",
    "repeat",
    "duration_ms",
    "total_ops",
    "throughput_ops_per_sec",
    "gets_attempted",
    "gets_hit",
    "inserts_attempted",
    "inserts_succeeded",
    "removes_attempted",
    "removes_succeeded",
    "final_size",
    "expected_size",
    "seed",
    "status",
)

_INT_FIELDS = {
    "threads",
    "repeat",
    "duration_ms",
    "total_ops",
    "gets_attempted",
    "gets_hit",
    "inserts_attempted",
    "inserts_succeeded",
    "removes_attempted",
    "removes_succeeded",
    "final_size",
    "expected_size",
    "seed",
}


@dataclass(frozen=True)
class ResultRow:
    config: str
    structure: str
    threads: int
    repeat: int
    duration_ms: int
    total_ops: int
    throughput_ops_per_sec: float
    gets_attempted: int
    gets_hit: int
    inserts_attempted: int
    inserts_succeeded: int
    removes_attempted: int
    removes_succeeded: int
    final_size: int
    expected_size: int
    seed: int
    status: str = "ok"


def write_rows(path: str, rows: list[ResultRow], append: bool = False) -> None:
    exists = append and os.path.exists(path) and os.path.getsize(path) > 0
    mode = "a" if append else "w"
    with open(path, mode, newline="") as f:
        writer = csv.writer(f)
        if not exists:
            writer.writerow(RESULT_FIELDS)
        for row in rows:
            writer.writerow([getattr(row, name) for name in RESULT_FIELDS])


def read_rows(path: str) -> list[ResultRow]:
    out = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for rec in reader:
            kwargs = {}
            for name in RESULT_FIELDS:
                raw = rec[name]
                if name in _INT_FIELDS:
                    kwargs[name] = int(raw)
                elif name == "throughput_ops_per_sec":
                    kwargs[name] = float(raw)
                else:
                    kwargs[name] = raw
            out.append(ResultRow(**kwargs))
    return out


# -- presets (the seven experiment configurations) ----------------------------

PRESETS: dict[str, dict] = {
    "uniform-small": dict(
        keygen="default",
        distribution="uniform",
        key_range=10_000,
        insert_frac=0.10,
        remove_frac=0.10,
    ),
    "zipfian-medium": dict(
        keygen="default",
        distribution="zipfian",
        alpha=1.0,
        key_range=100_000,
        insert_frac=0.025,
        remove_frac=0.025,
    ),
    "leafs-handshake-1e5": dict(
        keygen="leafs-handshake",
        threadloop="temporary-operations",
        key_range=100_000,
        oper_durations=(10_000, 5_000, 10_000),
        insert_fracs=(0.60, 0.0, 0.40),
        remove_fracs=(0.40, 0.0, 0.60),
        insert_alpha=2.0,
    ),
    "leafs-handshake-1e7": dict(
        keygen="leafs-handshake",
        threadloop="temporary-operations",
        key_range=10_000_000,
        oper_durations=(20_000, 20_000),
        insert_fracs=(0.90, 0.10),
        remove_fracs=(0.10, 0.90),
        insert_alpha=0.99,
    ),
    "leafs-handshake-1e8": dict(
        keygen="leafs-handshake",
        threadloop="temporary-operations",
        key_range=100_000_000,
        oper_durations=(100_000, 100_000, 100_000),
        insert_fracs=(0.80, 0.0, 0.20),
        remove_fracs=(0.20, 0.0, 0.80),
        insert_alpha=0.99,
    ),
    "wave-nonshuffle-1e6": dict(
        keygen="creakers-and-wave",
        key_range=1_000_000,
        wave_size=0.20,
        creaker_prob=0.0,
        creaker_size=0.0,
        wave_alpha=1.0,
        insert_frac=0.025,
        remove_frac=0.025,
        non_shuffle=True,
    ),
    "wave-nonshuffle-5e3": dict(
        keygen="creakers-and-wave",
        key_range=5_000,
        wave_size=0.10,
        creaker_prob=0.0,
        creaker_size=0.0,
        wave_alpha=1.0,
        insert_frac=0.10,
        remove_frac=0.10,
        non_shuffle=True,
    ),
}


def list_presets() -> dict[str, RunConfig]:
    return {name: RunConfig(name=name, **overrides) for name, overrides in PRESETS.items()}


def scale_to_range(config: RunConfig, max_range: int) -> RunConfig:
    """Desk-scale helper: cap the range (hardware-independence), scaling an
    explicit initial size proportionally."""
    if config.key_range <= max_range:
        return config
    factor = max_range / config.key_range
    initial = config.initial_size
    if initial is not None:
        initial = min(int(initial * factor), max_range)
    return replace(config, key_range=max_range, initial_size=initial)


# -- workload assembly ---------------------------------------------------------

_PREFILL_TID_BASE = 1_000_000
_PREFILL_STREAM_TID = 2_000_000


class _Workload:
    """Per-cell shared state: data array plus generator-specific shared cells."""

    def __init__(self, config: RunConfig, seed: int) -> None:
        self.config = config
        self.seed = seed
        self.data = KeyGeneratorData(config.key_range, shuffle=not config.non_shuffle, seed=seed)
        self.cw_shared: Optional[CreakersWaveShared] = None
        self.lh_cell: Optional[LastRemovedCell] = None
        if config.keygen == "creakers-and-wave":
            params = CreakersWaveParameters(
                creaker_prob=config.creaker_prob,
                creaker_size=config.creaker_size,
                wave_size=config.wave_size,
                creaker_age=config.creaker_age,
                wave_alpha=config.wave_alpha,
            )
            self.cw_shared = CreakersWaveShared(params, self.data)
        elif config.keygen == "leafs-handshake":
            self.lh_cell = LastRemovedCell(config.key_range // 2)

    @property
    def initial_size(self) -> int:
        if self.cw_shared is not None:
            return self.cw_shared.initial_size
        if self.config.initial_size is not None:
            return self.config.initial_size
        return self.config.key_range // 2

    def make_keygen(self, thread_id: int) -> KeyGenerator:
        config = self.config
        rng = seeded_rng(self.seed, thread_id)
        prefill_rng = seeded_rng(self.seed, thread_id + _PREFILL_STREAM_TID)
        if config.keygen == "default":
            dist = build_distribution(
                config.distribution,
                config.key_range,
                rng,
                hot_size=config.hot_size,
                hot_prob=config.hot_prob,
                alpha=config.alpha,
            )
            return DefaultKeyGenerator(self.data, dist, prefill_rng)
        if config.keygen == "skewed-sets":
            params = SkewedSetsParameters(
                read_hot_prob=config.read_hot_prob,
                read_hot_size=config.read_hot_size,
                write_hot_prob=config.write_hot_prob,
                write_hot_size=config.write_hot_size,
                intersection=config.inter,
            )
            return SkewedSetsKeyGenerator(params, self.data, rng, prefill_rng)
        if config.keygen == "temporary-skewed":
            params = TemporarySkewedParameters.with_defaults(
                state_count=config.state_count,
                hot_probs=list(config.hot_probs),
                hot_sizes=list(config.hot_sizes),
                hot_time=config.hot_time,
                relax_time=config.relax_time,
                hot_times=list(config.hot_times) if config.hot_times is not None else None,
                relax_times=list(config.relax_times) if config.relax_times is not None else None,
            )
            return TemporarySkewedKeyGenerator(params, self.data, rng, prefill_rng)
        if config.keygen == "creakers-and-wave":
            return CreakersWaveKeyGenerator(self.cw_shared, rng)
        if config.keygen == "leafs-handshake":
            params = LeafsHandshakeParameters(
                insert_alpha=config.insert_alpha,
                insert_window=config.insert_window,
                per_thread=config.per_thread_handshake,
            )
            return LeafsHandshakeKeyGenerator(
                params, self.data, rng, prefill_rng, shared_cell=self.lh_cell
            )
        raise UsageError(f"unknown keygen: {config.keygen!r} (expected one of {KEYGEN_IDS})")

    def make_loop(self, thread_id: int, index, stop_event: threading.Event) -> ThreadLoop:
        config = self.config
        keygen = self.make_keygen(thread_id)
        rng = seeded_rng(self.seed, thread_id + 500_000)
        if config.threadloop == "default":
            mix = OperationMix(config.insert_frac, config.remove_frac)
            return DefaultThreadLoop(mix, keygen, index, rng, stop_event)
        if config.threadloop == "temporary-operations":
            params = TemporaryOperationsParameters(
                durations=tuple(config.oper_durations),
                mixes=tuple(OperationMix(i, e) for i, e in zip(config.insert_fracs, config.remove_fracs)),
            )
            return TemporaryOperationsThreadLoop(params, keygen, index, rng, stop_event)
        raise UsageError(f"unknown threadloop: {config.threadloop!r} (expected one of {THREADLOOP_IDS})")


def validate_config(config: RunConfig) -> None:
    """Cross-field constraint checks; raises UsageError with a distinct
    message per violated constraint."""
    try:
        # Identity data (non-shuffle) keeps validation O(1) in the range.
        workload = _Workload(replace(config, non_shuffle=True), seed=0)
        workload.make_loop(0, None, threading.Event())
        if config.initial_size is not None:
            BenchmarkParameters(
                key_range=config.key_range,
                initial_size=config.initial_size,
                prefill_threads=config.prefill_threads,
                duration_ms=config.duration_ms,
                seed=config.seed,
                repeats=config.repeats,
            )
        for t in config.threads:
            if t <= 0:
                raise ValueError("thread counts must be positive")
        for s in config.structures:
            if s not in STRUCTURE_IDS:
                raise ValueError(f"unknown structure: {s!r} (expected one of {STRUCTURE_IDS})")
        if config.duration_ms <= 0:
            raise ValueError("duration must be positive")
        if config.repeats <= 0:
            raise ValueError("repeat count must be positive")
        if config.prefill_threads <= 0:
            raise ValueError("prefill thread count must be positive")
    except (ValueError, IndexError) as exc:
        raise UsageError(str(exc)) from exc


def run_cell(config: RunConfig, structure_id: str, n_threads: int, repeat: int) -> ResultRow:
    """One fresh structure: prefill, warmup, measured phase, one row."""
    seed = config.seed + repeat
    structure = build_structure(structure_id)
    try:
        workload = _Workload(config, seed)
        initial = workload.initial_size
        stop = threading.Event()
        prefill_loops = [
            workload.make_loop(_PREFILL_TID_BASE + i, structure, stop)
            for i in range(config.prefill_threads)
        ]
        run_prefill(structure, prefill_loops, initial)
        if workload.cw_shared is not None and config.creaker_age > 0:
            workload.make_keygen(_PREFILL_TID_BASE - 1).warmup(structure)
        stop = threading.Event()
        loops = [workload.make_loop(i, structure, stop) for i in range(n_threads)]
        agg = run_measured_phase(loops, config.duration_ms, initial_size=initial)
        structure.close()  # joins the maintenance daemon, if any, before sizing
        final_size = structure.size()
        return ResultRow(
            config=config.name if config.name != "custom" else config.config_hash(),
            structure=structure_id,
            threads=n_threads,
            repeat=repeat,
            duration_ms=config.duration_ms,
            total_ops=agg.total_ops,
            throughput_ops_per_sec=agg.throughput_ops_per_sec,
            gets_attempted=sum(s.gets_attempted for s in agg.per_thread),
            gets_hit=sum(s.gets_hit for s in agg.per_thread),
            inserts_attempted=sum(s.inserts_attempted for s in agg.per_thread),
            inserts_succeeded=agg.inserts_succeeded,
            removes_attempted=sum(s.removes_attempted for s in agg.per_thread),
            removes_succeeded=agg.removes_succeeded,
            final_size=final_size,
            expected_size=agg.expected_size,
            seed=seed,
        )
    finally:
        structure.close()


def run_experiment(config: RunConfig, progress=None) -> list[ResultRow]:
    """All structure x thread-count x repeat cells; a failing cell records a
    failed row and the remaining cells still run."""
    validate_config(config)
    rows = []
    for structure_id in config.structures:
        for n_threads in config.threads:
            for repeat in range(config.repeats):
                try:
                    row = run_cell(config, structure_id, n_threads, repeat)
                except Exception as exc:  # noqa: BLE001 - recorded, run continues
                    row = ResultRow(
                        config=config.name if config.name != "custom" else config.config_hash(),
                        structure=structure_id,
                        threads=n_threads,
                        repeat=repeat,
                        duration_ms=config.duration_ms,
                        total_ops=0,
                        throughput_ops_per_sec=0.0,
                        gets_attempted=0,
                        gets_hit=0,
                        inserts_attempted=0,
                        inserts_succeeded=0,
                        removes_attempted=0,
                        removes_succeeded=0,
                        final_size=0,
                        expected_size=0,
                        seed=config.seed + repeat,
                        status=f"failed: {exc}",
                    )
                rows.append(row)
                if progress is not None:
                    progress(row)
    if config.out:
        write_rows(config.out, rows, append=True)
    return rows


# -- CLI ------------------------------------------------------------------------


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skewbench",
        description="Benchmark concurrent BSTs under skewed, infinite workloads.",
    )
    parser.add_argument("--preset", choices=sorted(PRESETS), help="start from a named experiment preset")
    parser.add_argument("--list-presets", action="store_true", help="print the preset catalog and exit")
    parser.add_argument("--structure", dest="structures", type=lambda s: tuple(s.split(",")),
                        help=f"comma list of structures (default: all of {','.join(STRUCTURE_IDS)})")
    parser.add_argument("--keygen", choices=KEYGEN_IDS)
    parser.add_argument("--threadloop", choices=THREADLOOP_IDS)
    parser.add_argument("--range", dest="key_range", type=int)
    parser.add_argument("--initial", dest="initial_size", type=int)
    parser.add_argument("--threads", type=_int_list, help="comma list of worker thread counts")
    parser.add_argument("--prefill-threads", type=int)
    parser.add_argument("--duration-ms", type=int)
    parser.add_argument("--repeats", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--non-shuffle", action="store_true", default=None)
    parser.add_argument("--max-range", type=int, help="cap the key range (desk-scale runs)")
    parser.add_argument("--out", help="CSV output path")
    # default keygen / distributions
    parser.add_argument("--distribution", choices=("uniform", "skewed-uniform", "zipfian"))
    parser.add_argument("--hot-prob", dest="hot_prob", type=float)
    parser.add_argument("--hot-size", dest="hot_size", type=float)
    parser.add_argument("--alpha", type=float)
    # skewed sets
    parser.add_argument("--read-hot-prob", dest="read_hot_prob", type=float)
    parser.add_argument("--read-hot-size", dest="read_hot_size", type=float)
    parser.add_argument("--write-hot-prob", dest="write_hot_prob", type=float)
    parser.add_argument("--write-hot-size", dest="write_hot_size", type=float)
    parser.add_argument("--inter", type=float)
    # temporary skewed
    parser.add_argument("--state-count", dest="state_count", type=int)
    parser.add_argument("--hot-probs", dest="hot_probs", type=_float_list)
    parser.add_argument("--hot-sizes", dest="hot_sizes", type=_float_list)
    parser.add_argument("--hot-time", dest="hot_time", type=int)
    parser.add_argument("--relax-time", dest="relax_time", type=int)
    parser.add_argument("--hot-times", dest="hot_times", type=_int_list)
    parser.add_argument("--relax-times", dest="relax_times", type=_int_list)
    # creakers and wave
    parser.add_argument("--creaker-prob", dest="creaker_prob", type=float)
    parser.add_argument("--creaker-size", dest="creaker_size", type=float)
    parser.add_argument("--wave-size", dest="wave_size", type=float)
    parser.add_argument("--creaker-age", dest="creaker_age", type=int)
    parser.add_argument("--wave-alpha", dest="wave_alpha", type=float)
    # leafs handshake
    parser.add_argument("--insert-alpha", dest="insert_alpha", type=float)
    parser.add_argument("--insert-window", dest="insert_window", type=int)
    parser.add_argument("--per-thread-handshake", dest="per_thread_handshake",
                        action="store_true", default=None)
    # default loop
    parser.add_argument("--insert-frac", dest="insert_frac", type=float)
    parser.add_argument("--remove-frac", dest="remove_frac", type=float)
    # temporary operations loop
    parser.add_argument("--oper-durations", dest="oper_durations", type=_int_list)
    parser.add_argument("--insert-fracs", dest="insert_fracs", type=_float_list)
    parser.add_argument("--remove-fracs", dest="remove_fracs", type=_float_list)
    return parser


def parse_parameters(argv: list[str]) -> RunConfig:
    """argv -> validated RunConfig. Raises UsageError on constraint violations
    and SystemExit on malformed flags (argparse)."""
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    if args.list_presets:
        raise SystemExit(0 if _print_presets() else 0)
    kwargs: dict = {}
    if args.preset:
        kwargs.update(PRESETS[args.preset])
        kwargs["name"] = args.preset
    config_names = {f.name for f in fields(RunConfig)}
    for name, value in vars(args).items():
        if name in config_names and value is not None:
            kwargs[name] = value
    env_seed = os.environ.get("SKEWBENCH_SEED")
    if env_seed is not None:
        kwargs["seed"] = int(env_seed)
    config = RunConfig(**kwargs)
    if args.max_range is not None:
        config = scale_to_range(config, args.max_range)
    validate_config(config)
    return config


def _print_presets() -> bool:
    for name, config in list_presets().items():
        print(f"{name}: keygen={config.keygen} threadloop={config.threadloop} range={config.key_range}")
    return True


def main(argv: Optional[list[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_parameters(argv)
    except UsageError as exc:
        print(f"skewbench: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 0

    def progress(row: ResultRow) -> None:
        print(
            f"{row.config} {row.structure} t={row.threads} rep={row.repeat}: "
            f"{row.throughput_ops_per_sec:.0f} ops/s size={row.final_size} [{row.status}]"
        )

    rows = run_experiment(config, progress=progress)
    if config.out:
        print(f"wrote {len(rows)} rows to {config.out}")
    failed = sum(1 for r in rows if r.status != "ok")
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
