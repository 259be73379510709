from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple
import logging

import numpy as np

from diar.services.geometry import is_degenerate, pairwise_distances, weighted_mean

logger = logging.getLogger(__name__)


@dataclass
class CheckpointEntry:
    """Взвешенное скользящее среднее поглощённых эмбеддингов"""

    mean: np.ndarray
    weight: int


@dataclass
class Centroid:
    """Кандидат в спикеры: среднее, глобальная метка и счётчик использования"""

    mean: np.ndarray
    label: int
    usage: int
    weight: int


def _merge_means(first: np.ndarray, w_first: int, second: np.ndarray, w_second: int) -> np.ndarray:
    """Взвешенное среднее двух векторов; при вырождении остаётся первый"""
    mean = weighted_mean([first, second], [w_first, w_second])
    if is_degenerate(mean):
        logger.warning("⚠️ Вырожденное среднее при слиянии, сохраняется первый вектор")
        return np.array(first, dtype=np.float64)
    return mean


class CheckpointBuffer:
    """Буфер чекпоинтов фиксированной ёмкости N_ckpt"""

    def __init__(self, capacity: int, dim: Optional[int] = None):
        if capacity < 1:
            raise ValueError(f"Ёмкость буфера должна быть положительной, получено {capacity}")
        self.capacity = capacity
        self.dim = dim
        self.entries: List[CheckpointEntry] = []
        self.merge_count = 0

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def total_weight(self) -> int:
        return sum(entry.weight for entry in self.entries)

    def add(self, e) -> None:
        """Добавляет эмбеддинг; при заполненном буфере сначала сливает ближайшую пару"""
        vec = np.asarray(e, dtype=np.float64)
        if vec.ndim != 1 or (self.dim is not None and vec.shape[0] != self.dim):
            raise ValueError(f"Размерность {vec.shape} не совпадает с размерностью буфера {self.dim}")
        if self.dim is None:
            self.dim = vec.shape[0]

        if len(self.entries) >= self.capacity:
            if self.capacity == 1:
                # Единственная запись поглощает новый эмбеддинг
                only = self.entries[0]
                only.mean = _merge_means(only.mean, only.weight, vec, 1)
                only.weight += 1
                return
            self._merge_closest_pair()
        self.entries.append(CheckpointEntry(mean=vec.copy(), weight=1))

    def _merge_closest_pair(self) -> None:
        dist = pairwise_distances(np.stack([entry.mean for entry in self.entries]))
        n = dist.shape[0]
        upper = np.triu(np.ones((n, n), dtype=bool), k=1)
        i, j = divmod(int(np.argmin(np.where(upper, dist, np.inf))), n)

        first, second = self.entries[i], self.entries[j]
        first.mean = _merge_means(first.mean, first.weight, second.mean, second.weight)
        first.weight += second.weight
        del self.entries[j]
        self.merge_count += 1
        logger.debug(f"Слияние чекпоинтов {i} и {j} (расстояние {dist[i, j]:.4f})")

    def snapshot(self) -> np.ndarray:
        """Нормированные копии средних в порядке хранения"""
        rows = []
        for position, entry in enumerate(self.entries):
            norm = float(np.linalg.norm(entry.mean))
            if norm == 0.0:
                logger.warning(f"⚠️ Чекпоинт {position} имеет нулевую норму и пропущен")
                continue
            rows.append(entry.mean / norm)
        if not rows:
            return np.empty((0, self.dim or 0), dtype=np.float64)
        return np.stack(rows)


class CentroidStore:
    """Хранилище центроидов с картой псевдонимов для выбывших меток"""

    def __init__(self):
        self.centroids: Dict[int, Centroid] = {}
        self.alias_map: Dict[int, int] = {}
        self._next_label = 0

    def __len__(self) -> int:
        return len(self.centroids)

    @property
    def live_count(self) -> int:
        return len(self.centroids)

    @property
    def total_usage(self) -> int:
        return sum(c.usage for c in self.centroids.values())

    def resolve(self, label: int) -> int:
        """Возвращает живую метку для label, сжимая цепочку псевдонимов"""
        chain = []
        current = label
        while current in self.alias_map:
            chain.append(current)
            current = self.alias_map[current]
        if current not in self.centroids:
            raise KeyError(f"Метка {label} не соответствует ни одному живому центроиду")
        for retired in chain:
            self.alias_map[retired] = current
        return current

    def new_centroid(self, e, usage: int = 1, weight: int = 1) -> int:
        """Создаёт центроид со следующей свежей меткой"""
        label = self._next_label
        self._next_label += 1
        self.centroids[label] = Centroid(
            mean=np.array(e, dtype=np.float64), label=label, usage=usage, weight=weight
        )
        logger.debug(f"Новый центроид с меткой {label}")
        return label

    def assign(self, label: int, e) -> int:
        """Обновляет среднее центроида и увеличивает счётчик использования"""
        try:
            live = self.resolve(label)
        except KeyError as exc:
            raise ValueError(str(exc)) from exc
        centroid = self.centroids[live]
        centroid.mean = _merge_means(centroid.mean, centroid.weight, np.asarray(e, dtype=np.float64), 1)
        centroid.weight += 1
        centroid.usage += 1
        return live

    def merge(self, a: int, b: int) -> int:
        """Сливает два живых центроида; выживает более используемый

        При равном использовании выживает меньшая метка.
        """
        if a == b:
            raise ValueError(f"Нельзя слить центроид {a} сам с собой")
        if a not in self.centroids or b not in self.centroids:
            raise ValueError(f"Для слияния нужны две живые метки, получено {a} и {b}")
        ca, cb = self.centroids[a], self.centroids[b]
        if (ca.usage, -ca.label) >= (cb.usage, -cb.label):
            survivor, loser = ca, cb
        else:
            survivor, loser = cb, ca

        survivor.mean = _merge_means(survivor.mean, survivor.weight, loser.mean, loser.weight)
        survivor.weight += loser.weight
        survivor.usage += loser.usage
        del self.centroids[loser.label]
        self.alias_map[loser.label] = survivor.label
        for retired, target in list(self.alias_map.items()):
            if target == loser.label:
                self.alias_map[retired] = survivor.label
        logger.info(f"Центроид {loser.label} слит в {survivor.label}")
        return survivor.label

    def vectors(self) -> Tuple[List[int], np.ndarray]:
        """Живые метки по возрастанию и нормированные средние"""
        labels = sorted(self.centroids)
        if not labels:
            return [], np.empty((0, 0), dtype=np.float64)
        means = np.stack([self.centroids[label].mean for label in labels])
        norms = np.linalg.norm(means, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            logger.warning("⚠️ Нулевое среднее центроида, вектор оставлен нулевым")
            norms = np.where(norms == 0.0, 1.0, norms)
        return labels, means / norms
