from pathlib import Path

import dramatiq
import sentry_sdk
from django.conf import settings

from rmsa.config import build_config
from rmsa.exports import atomic_write_text
from rmsa.results import run
from rmsa.sweeps import ERROR_FILE, SWEEP_QUEUE


@dramatiq.actor(queue_name=SWEEP_QUEUE, max_retries=0, time_limit=settings.SWEEP_TIME_LIMIT_MS)
def run_sweep_entry(flat: dict[str, str], run_dir: str):
    """One sweep combination. Failures stay inside the entry: they land in
    its error.txt and the rest of the sweep carries on."""
    out_dir = Path(run_dir)
    try:
        config = build_config(flat)
        run([config], out_dir)
    except Exception as e:
        run_sweep_entry.logger.exception(f"Sweep entry {out_dir.name} failed")
        sentry_sdk.capture_exception(e)
        atomic_write_text(out_dir / ERROR_FILE, f"{type(e).__name__}: {e}\n")
        return

    run_sweep_entry.logger.info(f"Sweep entry {out_dir.name} done: {config.describe()}")
