import csv
import itertools
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import dramatiq
from django.conf import settings

from rmsa.config import CONFIG_KEYS, DEFAULT_FINAL_WINDOW, build_config, layer, read_config_file
from rmsa.exceptions import ConfigError
from rmsa.exports import atomic_write_text, format_float, render_csv
from rmsa.results import MANIFEST_FILE, load_manifest

logger = logging.getLogger(__name__)

SWEEP_QUEUE = "sweeps"
ERROR_FILE = "error.txt"
SUMMARY_FILE = "sweep.csv"


def parse_sweep_grid(text: str, source: str = "<string>") -> dict[str, list[str]]:
    """One `key = value, value, ...` line per swept key. Keys whose values
    hold commas themselves (seeds, bit_rate_weights) separate the
    alternatives with `;` instead."""
    grid: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue

        key, sep, values = line.partition("=")
        key = key.strip()
        if not sep or key not in CONFIG_KEYS or key == "preset":
            raise ConfigError(f"{source}:{lineno}: {key!r} cannot be swept")
        if key in grid:
            raise ConfigError(f"{source}:{lineno}: {key!r} is listed twice")

        separator = ";" if ";" in values else ","
        alternatives = [value.strip() for value in values.split(separator) if value.strip()]
        if not alternatives:
            raise ConfigError(f"{source}:{lineno}: {key!r} has no values")
        grid[key] = alternatives

    if not grid:
        raise ConfigError(f"{source}: the sweep grid is empty")
    return grid


def read_sweep_grid(path: str | Path) -> dict[str, list[str]]:
    path = Path(path)
    try:
        return parse_sweep_grid(path.read_text(), str(path))
    except OSError as e:
        raise ConfigError(f"Cannot read sweep grid {path}: {e}") from e


def expand_grid(grid: dict[str, list[str]]) -> list[dict[str, str]]:
    keys = list(grid)
    return [dict(zip(keys, combination, strict=True)) for combination in itertools.product(*grid.values())]


@dataclass
class SweepRow:
    run: str
    overrides: dict[str, str]
    final_window_bp: float | None = None
    error: str | None = None

    @property
    def described_overrides(self) -> str:
        return "; ".join(f"{key}={value}" for key, value in self.overrides.items())


def collect_row(run_dir: Path, overrides: dict[str, str], final_window: int) -> SweepRow:
    row = SweepRow(run=run_dir.name, overrides=overrides)
    if (run_dir / ERROR_FILE).is_file():
        row.error = (run_dir / ERROR_FILE).read_text().strip()
    elif (run_dir / MANIFEST_FILE).is_file():
        manifest = load_manifest(run_dir / MANIFEST_FILE)
        row.final_window_bp = final_window_bp(Path(manifest.outputs["results"]), final_window)
    else:
        row.error = "no result (timed out or never picked up)"
    return row


def final_window_bp(results_csv: Path, final_window: int) -> float:
    """Mean over the last `final_window` episodes of the first results column."""
    rows = list(csv.reader(results_csv.read_text().splitlines()))[1:]
    values = [float(row[1]) for row in rows[-final_window:]]
    return math.fsum(values) / len(values)


def render_sweep_csv(rows: list[SweepRow]) -> str:
    succeeded = sorted((r for r in rows if r.error is None), key=lambda r: (r.final_window_bp, r.run))
    failed = [r for r in rows if r.error is not None]
    return render_csv(
        ["run", "overrides", "final_window_bp", "status"],
        [
            *([r.run, r.described_overrides, format_float(r.final_window_bp), "ok"] for r in succeeded),
            *([r.run, r.described_overrides, "", f"failed: {r.error}"] for r in failed),
        ],
    )


def dispatch(messages: list[dramatiq.Message], workers: int) -> None:
    """Runs the messages on an in-process worker pool and waits for them.
    With a Redis broker, external `rundramatiq` workers may help out."""
    broker = dramatiq.get_broker()
    worker = dramatiq.Worker(broker, worker_threads=workers)
    worker.start()
    try:
        for message in messages:
            broker.enqueue(message)
        broker.join(SWEEP_QUEUE)
    finally:
        worker.stop()


def sweep(
    config_path: str | Path,
    grid_path: str | Path,
    out_dir: str | Path,
    workers: int | None = None,
    final_window: int | None = None,
) -> list[SweepRow]:
    from rmsa.tasks import run_sweep_entry

    base = read_config_file(config_path)
    combinations = expand_grid(read_sweep_grid(grid_path))
    workers = workers or settings.SWEEP_WORKERS
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    messages = []
    for index, overrides in enumerate(combinations):
        run_dir = out_dir / f"run-{index:03d}"
        flat = layer(base, overrides)
        entries.append((run_dir, overrides))
        for stale in (ERROR_FILE, MANIFEST_FILE):
            (run_dir / stale).unlink(missing_ok=True)

        # Combinations that do not even validate fail on their own, the rest still run.
        try:
            config = build_config(flat)
        except ConfigError as e:
            atomic_write_text(run_dir / ERROR_FILE, f"{type(e).__name__}: {e}\n")
            continue

        if final_window is None:
            final_window = config.final_window
        messages.append(run_sweep_entry.message(flat, str(run_dir)))

    final_window = final_window or DEFAULT_FINAL_WINDOW
    logger.info(f"Sweeping {len(entries)} combination(s) on {workers} worker(s), writing to {out_dir}")
    dispatch(messages, workers)

    rows = [collect_row(run_dir, overrides, final_window) for run_dir, overrides in entries]
    for row in rows:
        if row.error:
            logger.warning(f"Sweep entry {row.run} ({row.described_overrides}) failed: {row.error}")

    atomic_write_text(out_dir / SUMMARY_FILE, render_sweep_csv(rows))
    return rows
