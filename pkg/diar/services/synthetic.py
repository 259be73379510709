"""
Генератор синтетических сессий: направления спикеров на сфере,
экспоненциальные длительности реплик и зашумлённые эмбеддинги окон.
"""
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, List, Tuple, Union
import logging

import numpy as np
from dotenv import dotenv_values

from diar.models.core import Annotation
from diar.services.stream_io import make_records, record_dtype
from diar.services.windows import plan_windows

logger = logging.getLogger(__name__)

# Шаг округления границ реплик (с)
BOUNDARY_RESOLUTION = 1e-3


@dataclass(frozen=True)
class SyntheticSpec:
    """Параметры синтетической сессии"""

    n_speakers: int
    duration: float
    dim: int = 256
    noise_sigma: float = 0.05
    min_speaker_sim_gap: float = 0.3
    turn_mean: float = 8.0
    seed: int = 0
    window_len: float = 1.5
    window_shift: float = 0.5
    max_attempts: int = 10000

    def __post_init__(self):
        if self.n_speakers < 1:
            raise ValueError(f"n_speakers должен быть >= 1, получено {self.n_speakers}")
        if not self.duration > 0:
            raise ValueError(f"duration должна быть > 0, получено {self.duration}")
        if self.dim < 1:
            raise ValueError(f"dim должен быть >= 1, получено {self.dim}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma должен быть >= 0, получено {self.noise_sigma}")
        if not -1.0 <= self.min_speaker_sim_gap <= 1.0:
            raise ValueError(f"min_speaker_sim_gap должен лежать в [-1, 1], получено {self.min_speaker_sim_gap}")
        if not self.turn_mean > 0:
            raise ValueError(f"turn_mean должен быть > 0, получено {self.turn_mean}")
        if not 0 < self.window_shift <= self.window_len:
            raise ValueError(
                f"Требуется 0 < window_shift <= window_len, получено {self.window_shift} / {self.window_len}"
            )
        if self.max_attempts < 1:
            raise ValueError(f"max_attempts должен быть >= 1, получено {self.max_attempts}")

    @classmethod
    def from_config_file(cls, path: Union[str, Path]) -> "SyntheticSpec":
        """Читает спецификацию из файла key=value (ключи - имена полей)"""
        return cls(**cls.read_config_values(path))

    @classmethod
    def read_config_values(cls, path: Union[str, Path]) -> Dict[str, Union[int, float]]:
        values = dotenv_values(path)
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            name = key.strip().lower()
            if name not in types:
                raise ValueError(f"Неизвестный параметр синтетической сессии: {key}")
            if raw is None:
                raise ValueError(f"Параметр {key} задан без значения")
            cast = int if types[name] in (int, "int") else float
            try:
                kwargs[name] = cast(raw)
            except ValueError:
                raise ValueError(f"Параметр {key}: некорректное значение {raw!r}")
        return kwargs


def sample_directions(rng: np.random.Generator, spec: SyntheticSpec) -> np.ndarray:
    """Единичные направления спикеров с попарным косинусом не выше порога

    Raises:
        ValueError: не удалось подобрать направления за max_attempts попыток
    """
    directions: List[np.ndarray] = []
    attempts = 0
    while len(directions) < spec.n_speakers:
        if attempts >= spec.max_attempts:
            raise ValueError(
                f"Не удалось подобрать {spec.n_speakers} направлений с косинусом <= "
                f"{spec.min_speaker_sim_gap} за {spec.max_attempts} попыток"
            )
        attempts += 1
        candidate = rng.standard_normal(spec.dim)
        norm = np.linalg.norm(candidate)
        if norm == 0.0:
            continue
        candidate /= norm
        if all(float(candidate @ d) <= spec.min_speaker_sim_gap for d in directions):
            directions.append(candidate)
    logger.debug(f"Направления спикеров подобраны за {attempts} попыток")
    return np.stack(directions)


def _round_boundary(t: float) -> float:
    return round(round(t / BOUNDARY_RESOLUTION) * BOUNDARY_RESOLUTION, 3)


def sample_turns(rng: np.random.Generator, spec: SyntheticSpec) -> List[Tuple[float, float, int]]:
    """Последовательность реплик (start, end, спикер) без пауз на [0, duration)"""
    duration = _round_boundary(spec.duration)
    if spec.n_speakers == 1:
        return [(0.0, duration, 0)]

    turns = []
    t = 0.0
    speaker = int(rng.integers(spec.n_speakers))
    while t < duration:
        length = max(float(rng.exponential(spec.turn_mean)), spec.window_shift)
        end = min(_round_boundary(t + length), duration)
        if end <= t:
            break
        turns.append((t, end, speaker))
        t = end
        others = [s for s in range(spec.n_speakers) if s != speaker]
        speaker = others[int(rng.integers(len(others)))]
    return turns


def generate_synthetic(spec: SyntheticSpec) -> Tuple[np.ndarray, Annotation]:
    """Генерирует поток эмбеддингов и эталонную разметку

    Полностью детерминирован при фиксированном seed. При noise_sigma = 0
    каждый эмбеддинг совпадает с направлением своего спикера.

    Returns:
        (записи SDEB1, эталонная разметка)
    """
    rng = np.random.default_rng(spec.seed)
    directions = sample_directions(rng, spec)
    turns = sample_turns(rng, spec)

    reference = Annotation(uri=f"synthetic_{spec.seed}")
    starts, ends, vectors = [], [], []
    for turn_start, turn_end, speaker in turns:
        reference.add(turn_start, turn_end, f"spk{speaker}")
        for start, end in plan_windows([(turn_start, turn_end)], spec.window_len, spec.window_shift):
            direction = directions[speaker]
            if spec.noise_sigma > 0:
                noisy = direction + spec.noise_sigma * rng.standard_normal(spec.dim)
                vector = noisy / np.linalg.norm(noisy)
            else:
                vector = direction
            starts.append(start)
            ends.append(end)
            vectors.append(vector)

    if not vectors:
        return np.zeros(0, dtype=record_dtype(spec.dim)), reference
    records = make_records(starts, ends, np.stack(vectors))
    logger.info(
        f"✅ Синтетическая сессия: {spec.n_speakers} спикер(ов), {len(turns)} реплик, "
        f"{len(records)} эмбеддингов"
    )
    return records, reference
