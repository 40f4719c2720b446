"""Utterance records: one aligned <text, durations> pair with its conditions."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from ..align import DurationSequence
from .speed import NUM_SPEED_LEVELS

DEFAULT_SCENES = ("formal", "casual", "neutral")
SPLITS = ("train", "dev", "test")


class RecordError(ValueError):
    pass


@dataclass(frozen=True)
class UtteranceRecord:
    id: str
    text: str
    phonemes: tuple[str, ...]
    durations: tuple[int, ...]
    speed_level: int
    scene_id: int
    split: str = "train"

    def __post_init__(self):
        object.__setattr__(self, "phonemes", tuple(self.phonemes))
        object.__setattr__(self, "durations", tuple(int(d) for d in self.durations))
        if not self.phonemes:
            raise RecordError(f"{self.id}: no phonemes")
        if len(self.phonemes) != len(self.durations):
            raise RecordError(f"{self.id}: {len(self.phonemes)} phonemes but {len(self.durations)} durations")
        DurationSequence(self.durations)
        if not 0 <= self.speed_level < NUM_SPEED_LEVELS:
            raise RecordError(f"{self.id}: speed_level {self.speed_level} outside [0, {NUM_SPEED_LEVELS})")
        if self.scene_id < 0:
            raise RecordError(f"{self.id}: negative scene_id")
        if self.split not in SPLITS:
            raise RecordError(f"{self.id}: unknown split {self.split!r}")

    @property
    def num_frames(self) -> int:
        return sum(self.durations)

    def check_scenes(self, num_scenes: int) -> None:
        if self.scene_id >= num_scenes:
            raise RecordError(f"{self.id}: scene_id {self.scene_id} outside [0, {num_scenes})")

    def to_json(self) -> dict:
        d = asdict(self)
        d["phonemes"] = list(self.phonemes)
        d["durations"] = list(self.durations)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "UtteranceRecord":
        return cls(id=str(d["id"]), text=d["text"], phonemes=tuple(d["phonemes"]),
                   durations=tuple(d["durations"]), speed_level=int(d["speed_level"]),
                   scene_id=int(d["scene_id"]), split=d.get("split", "train"))
