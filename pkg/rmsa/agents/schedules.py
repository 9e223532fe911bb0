from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class EpsilonSchedule(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    start: float = Field(ge=0.0, le=1.0)
    end: float | None = Field(default=None, ge=0.0, le=1.0)
    mode: Literal["constant", "linear"] = "constant"

    @model_validator(mode="after")
    def check_end(self):
        if self.mode == "linear" and self.end is None:
            raise ValueError("A linear epsilon schedule needs an end value")
        return self

    def __str__(self):
        if self.mode == "linear":
            return f"{self.start:g}->{self.end:g} linear"
        return f"{self.start:g} constant"


def epsilon_at(schedule: EpsilonSchedule, episode_index: int, total_episodes: int) -> float:
    """Exploration rate for an episode. Linear schedules hit `start` on the
    first episode and `end` on the last one."""
    if not 0 <= episode_index < total_episodes:
        raise ValueError(f"Episode {episode_index} is outside [0, {total_episodes})")

    if schedule.mode == "constant" or total_episodes == 1:
        return schedule.start

    return schedule.start + (schedule.end - schedule.start) * episode_index / (total_episodes - 1)
