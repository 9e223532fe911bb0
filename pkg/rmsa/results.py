import logging
import time
from datetime import UTC, datetime
from pathlib import Path

import pydantic
from pydantic import BaseModel, ConfigDict
from pyinstrument import Profiler

import eonroute
from rmsa.agents import dump_checkpoint
from rmsa.config import ExperimentConfig
from rmsa.engine import ExperimentResult, run_experiment
from rmsa.exceptions import ConfigError
from rmsa.exports import atomic_write_text, render_results_csv, render_seeds_csv, render_summary_csv
from rmsa.xlsx_utils import export_results_xlsx

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"


class RunManifest(BaseModel):
    """Everything needed to redo a run: same configs and seeds give a
    byte-identical results.csv."""

    model_config = ConfigDict(extra="forbid")

    version: str
    created_at: datetime
    configs: list[ExperimentConfig]
    seeds: list[int]
    episodes: int
    final_window: int
    duration_seconds: float
    outputs: dict[str, str]


def check_run(configs: list[ExperimentConfig]) -> None:
    if not configs:
        raise ConfigError("Nothing to run")

    labels = [config.label for config in configs]
    if duplicated := sorted({label for label in labels if labels.count(label) > 1}):
        raise ConfigError(f"Labels must be unique within a run, duplicated: {', '.join(duplicated)}")

    first = configs[0]
    for config in configs[1:]:
        if config.episodes != first.episodes or config.seeds != first.seeds:
            raise ConfigError(
                f"All configs in a run share episodes and seeds: {config.label} has "
                f"{config.episodes} episodes / seeds {config.seeds}, {first.label} has "
                f"{first.episodes} / {first.seeds}"
            )


def write_checkpoints(results: list[ExperimentResult], out_dir: Path) -> dict[str, str]:
    written = {}
    for result in results:
        if not result.config.algorithm.learns:
            continue

        for seed in result.seeds:
            path = out_dir / "checkpoints" / f"{result.label}-seed{seed.seed}.csv"
            atomic_write_text(path, dump_checkpoint(seed.agent))
            written[f"checkpoint:{result.label}:{seed.seed}"] = str(path)

    return written


def run(
    configs: list[ExperimentConfig],
    out_dir: Path,
    xlsx: bool = False,
    profile: bool = False,
    checkpoint: bool = False,
) -> RunManifest:
    check_run(configs)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    profiler = Profiler() if profile else None
    if profiler:
        profiler.start()

    started = time.monotonic()
    results = [run_experiment(config) for config in configs]
    duration = time.monotonic() - started

    final_window = configs[0].final_window
    outputs = {
        "results": out_dir / "results.csv",
        "seeds": out_dir / "seeds.csv",
        "summary": out_dir / "summary.csv",
    }
    atomic_write_text(outputs["results"], render_results_csv(results))
    atomic_write_text(outputs["seeds"], render_seeds_csv(results))
    atomic_write_text(outputs["summary"], render_summary_csv(results, final_window))

    if xlsx:
        outputs["xlsx"] = out_dir / "results.xlsx"
        export_results_xlsx(results, outputs["xlsx"])

    outputs = {name: str(path) for name, path in outputs.items()}
    if checkpoint:
        outputs |= write_checkpoints(results, out_dir)

    if profiler:
        profiler.stop()
        outputs["profile"] = str(out_dir / "profile.html")
        atomic_write_text(Path(outputs["profile"]), profiler.output_html())

    manifest = RunManifest(
        version=eonroute.__version__,
        created_at=datetime.now(UTC),
        configs=configs,
        seeds=configs[0].seeds,
        episodes=configs[0].episodes,
        final_window=final_window,
        duration_seconds=round(duration, 3),
        outputs=outputs,
    )
    atomic_write_text(out_dir / MANIFEST_FILE, manifest.model_dump_json(indent=2) + "\n")

    for result in results:
        logger.info(f"[{result.label}] final-window BP {result.final_window_mean(final_window):.4f}")
    logger.info(f"Wrote {len(outputs)} output file(s) and the manifest to {out_dir}")
    return manifest


def load_manifest(path: str | Path) -> RunManifest:
    path = Path(path)
    try:
        return RunManifest.model_validate_json(path.read_text())
    except OSError as e:
        raise ConfigError(f"Cannot read manifest {path}: {e}") from e
    except pydantic.ValidationError as e:
        raise ConfigError(f"Manifest {path} is not valid: {e}") from e
