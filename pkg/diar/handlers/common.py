from typing import Sequence, Tuple
import logging

import numpy as np

from diar.models.core import DiarizerConfig, TimedEmbedding
from diar.utils.config import MAX_INITIAL_SPEAKERS, WINDOW_LEN, WINDOW_SHIFT

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    """Некорректные флаги или несовместимые гиперпараметры"""


def build_config(n_init: int, n_ckpt: int, threshold: float, dim: int,
                 max_speakers: int = MAX_INITIAL_SPEAKERS) -> DiarizerConfig:
    """Собирает конфигурацию диаризатора; ошибки превращаются в UsageError"""
    try:
        return DiarizerConfig(
            n_init=n_init,
            n_ckpt=n_ckpt,
            centroid_link_threshold=threshold,
            max_initial_speakers=max_speakers,
            dim=dim,
            window_len=WINDOW_LEN,
            window_shift=WINDOW_SHIFT,
        )
    except ValueError as e:
        raise UsageError(str(e)) from e


def audio_duration(stream: Sequence[TimedEmbedding]) -> float:
    """Длительность аудио, покрытого потоком: последний end минус первый start"""
    if not stream:
        return 0.0
    return max(te.end for te in stream) - stream[0].start


def mean_std(values: Sequence[float]) -> Tuple[float, float]:
    """Среднее и стандартное отклонение (ddof=0, для одного значения 0)"""
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std())
