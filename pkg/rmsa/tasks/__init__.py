from .sweeps import run_sweep_entry  # noqa
