import csv
import io
import itertools
import os
import tempfile
from pathlib import Path
from typing import TYPE_CHECKING

from rmsa.controller import BlockReason

if TYPE_CHECKING:
    from rmsa.engine import ExperimentResult


def atomic_write_bytes(path: Path, data: bytes) -> None:
    """Readers see either the old file or the complete new one."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, temp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(temp_name, path)
    except BaseException:
        Path(temp_name).unlink(missing_ok=True)
        raise


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def format_float(value: float) -> str:
    return f"{value:.6f}"


def render_csv(header: list[str], rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def render_results_csv(results: list["ExperimentResult"]) -> str:
    """Episode, then the seed-averaged blocking probability of every label."""
    series = [result.mean_series() for result in results]
    episodes = len(series[0]) if series else 0
    return render_csv(
        ["episode", *(result.label for result in results)],
        ([episode, *(format_float(s[episode]) for s in series)] for episode in range(episodes)),
    )


def render_seeds_csv(results: list["ExperimentResult"]) -> str:
    rows = (
        [
            result.label,
            seed.seed,
            stats.episode_index,
            stats.blocked,
            stats.total,
            format_float(stats.blocking_probability),
            stats.reasons[BlockReason.NO_MODULATION_REACH],
            stats.reasons[BlockReason.NO_SPECTRUM],
        ]
        for result in results
        for seed in result.seeds
        for stats in seed.episodes
    )
    return render_csv(
        [
            "label",
            "seed",
            "episode",
            "blocked",
            "total",
            "blocking_probability",
            "no_modulation_reach",
            "no_spectrum",
        ],
        rows,
    )


def relative_reduction(bp: float, baseline_bp: float) -> float | None:
    """How much lower `bp` is than `baseline_bp`, in percent. Negative
    values mean an increase; None when the baseline never blocks."""
    if baseline_bp == 0:
        return None
    return (baseline_bp - bp) / baseline_bp * 100.0


def render_summary_csv(results: list["ExperimentResult"], final_window: int) -> str:
    means = {result.label: result.final_window_mean(final_window) for result in results}

    rows = [["final_window_bp", label, "", format_float(bp)] for label, bp in means.items()]
    for label, baseline in itertools.permutations(means, 2):
        reduction = relative_reduction(means[label], means[baseline])
        rows.append(["reduction_pct", label, baseline, "" if reduction is None else f"{reduction:.2f}"])

    return render_csv(["metric", "label", "versus", "value"], rows)
