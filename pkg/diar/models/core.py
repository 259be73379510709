from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple
import math

import numpy as np

# Допуск единичной нормы после нормализации
UNIT_NORM_TOL = 1e-6


class EmbeddingError(ValueError):
    """Некорректный вектор эмбеддинга с указанием позиции в потоке"""

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        if position is not None:
            message = f"{message} (позиция в потоке: {position})"
        super().__init__(message)


@dataclass(frozen=True)
class DiarizerConfig:
    """Гиперпараметры онлайн-диаризации

    Проверяется сразу при создании, до начала обработки потока.
    """

    n_init: int = 60
    n_ckpt: int = 180
    centroid_link_threshold: float = 0.25
    max_initial_speakers: int = 5
    dim: int = 256
    window_len: float = 1.5
    window_shift: float = 0.5

    def __post_init__(self):
        for name in ("n_init", "n_ckpt", "max_initial_speakers", "dim"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ValueError(f"{name} должен быть положительным целым, получено {value!r}")
        if self.n_init > self.n_ckpt:
            raise ValueError(
                f"n_init ({self.n_init}) не может превышать n_ckpt ({self.n_ckpt})"
            )
        if not 0.0 < self.centroid_link_threshold < 2.0:
            raise ValueError(
                f"centroid_link_threshold должен лежать в (0, 2), получено {self.centroid_link_threshold}"
            )
        if not 0.0 < self.window_shift <= self.window_len:
            raise ValueError(
                f"Требуется 0 < window_shift <= window_len, получено "
                f"{self.window_shift} / {self.window_len}"
            )


def default_config() -> DiarizerConfig:
    """Опубликованные значения по умолчанию: N_init=60, N_ckpt=180, порог 0.25"""
    return DiarizerConfig()


def normalize(v: Sequence[float], dim: Optional[int] = None, position: Optional[int] = None) -> np.ndarray:
    """Приводит вектор к единичной L2-норме

    Args:
        v: исходный вектор
        dim: ожидаемая размерность (если задана)
        position: позиция в потоке для диагностики

    Returns:
        Новый массив float64 с нормой 1
    """
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise EmbeddingError(f"Ожидался одномерный вектор, получена форма {arr.shape}", position)
    if dim is not None and arr.shape[0] != dim:
        raise EmbeddingError(f"Размерность {arr.shape[0]} не совпадает с ожидаемой {dim}", position)
    if not np.all(np.isfinite(arr)):
        raise EmbeddingError("Вектор содержит NaN или Inf", position)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise EmbeddingError("Вектор с нулевой нормой нельзя нормализовать", position)
    return arr / norm


@dataclass(frozen=True, eq=False)
class TimedEmbedding:
    """Эмбеддинг окна с его временными границами (секунды)"""

    embedding: np.ndarray
    start: float
    end: float

    def __post_init__(self):
        if not self.end > self.start:
            raise ValueError(f"Окно должно иметь end > start, получено [{self.start}, {self.end})")

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class LabeledSegment:
    """Окно с выданной глобальной меткой спикера"""

    start: float
    end: float
    label: int

    def __post_init__(self):
        if not self.end > self.start:
            raise ValueError(f"Сегмент должен иметь end > start, получено [{self.start}, {self.end})")


@dataclass(frozen=True, order=True)
class Segment:
    """Строка RTTM: начало, длительность, спикер"""

    start: float
    duration: float
    speaker: str

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"Длительность сегмента должна быть > 0, получено {self.duration}")

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass
class Annotation:
    """Набор сегментов одного файла; используется и для эталона, и для гипотезы"""

    uri: str = "session"
    segments: List[Segment] = field(default_factory=list)

    def add(self, start: float, end: float, speaker: str) -> None:
        self.segments.append(Segment(start=start, duration=end - start, speaker=str(speaker)))

    def speakers(self) -> List[str]:
        return sorted({seg.speaker for seg in self.segments})

    def is_empty(self) -> bool:
        return not self.segments

    def speaker_intervals(self, speaker: str) -> List[Tuple[float, float]]:
        return sorted((seg.start, seg.end) for seg in self.segments if seg.speaker == speaker)

    def speech_regions(self) -> List[Tuple[float, float]]:
        """Объединение всех сегментов без учёта спикеров (оракульная разметка речи)"""
        return merge_intervals((seg.start, seg.end) for seg in self.segments)

    def total_duration(self) -> float:
        return sum(end - start for start, end in self.speech_regions())


def merge_intervals(intervals: Iterable[Tuple[float, float]]) -> List[Tuple[float, float]]:
    """Сливает пересекающиеся и смежные интервалы"""
    merged: List[Tuple[float, float]] = []
    for start, end in sorted(intervals):
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def seconds_to_us(t: float) -> int:
    """Секунды в целые микросекунды"""
    return int(math.floor(t * 1e6 + 0.5))
