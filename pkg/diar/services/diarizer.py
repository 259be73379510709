"""
Онлайн-диаризация с двойным буфером: фаза накопления, начальная
кластеризация и пошаговая обработка с решением о числе спикеров.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence
import logging
import time

import numpy as np

from diar.models.core import DiarizerConfig, LabeledSegment, TimedEmbedding, default_config, normalize
from diar.services.buffers import CentroidStore, CheckpointBuffer
from diar.services.clustering import (
    SCORE_TIE_TOL,
    ahc_build,
    cut_threshold,
    estimate_count,
    score_candidate,
)
from diar.services.geometry import is_degenerate, pairwise_distances

logger = logging.getLogger(__name__)

# k-1 применяется, только если силуэт выше силуэта для k хотя бы на эту величину
DECREASE_MARGIN = 0.1


class Phase(Enum):
    STACKING = "stacking"
    ONLINE = "online"


@dataclass(frozen=True)
class Decision:
    """Результат сравнения силуэтов для k-1, k, k+1"""

    previous_k: int
    chosen_k: int
    scores: Dict[int, float]


class OnlineDiarizer:
    """Сессия онлайн-диаризации

    Один объект - один поток эмбеддингов. Выданные сегменты
    никогда не изменяются: список emitted только дополняется.
    """

    def __init__(self, config: Optional[DiarizerConfig] = None):
        self.config = config or default_config()
        self.phase = Phase.STACKING
        self.stash: List[TimedEmbedding] = []
        self.checkpoint = CheckpointBuffer(self.config.n_ckpt, dim=self.config.dim)
        self.centroids = CentroidStore()
        self.current_k = 0
        self.emitted: List[LabeledSegment] = []
        self.decisions: List[Decision] = []
        self.step_times: List[float] = []
        self._n_seen = 0
        self._last_start: Optional[float] = None

    @property
    def n_seen(self) -> int:
        return self._n_seen

    def push(self, te: TimedEmbedding) -> List[LabeledSegment]:
        """Принимает очередной эмбеддинг и возвращает новые выданные сегменты

        В фазе накопления возвращает пустой список, на N_init-м
        эмбеддинге - метки всех накопленных окон, далее - ровно один сегмент.
        """
        if self._last_start is not None and te.start < self._last_start:
            raise ValueError(
                f"Нарушен порядок потока: начало {te.start} раньше предыдущего {self._last_start} "
                f"(позиция {self._n_seen})"
            )
        embedding = normalize(te.embedding, dim=self.config.dim, position=self._n_seen)
        te = TimedEmbedding(embedding=embedding, start=te.start, end=te.end)

        started = time.perf_counter()
        self._last_start = te.start
        self._n_seen += 1
        if self.phase is Phase.STACKING:
            self.stash.append(te)
            if len(self.stash) < self.config.n_init:
                out: List[LabeledSegment] = []
            else:
                out = self._release_stash()
        else:
            out = [self.online_step(te)]
        self.step_times.append(time.perf_counter() - started)
        return out

    def finalize(self) -> List[LabeledSegment]:
        """Конец потока: размечает накопленное, если N_init так и не был достигнут"""
        if self.phase is Phase.ONLINE or not self.stash:
            return []
        logger.info(f"Поток закончился до N_init: кластеризация {len(self.stash)} накопленных эмбеддингов")
        return self._release_stash()

    def _release_stash(self) -> List[LabeledSegment]:
        labels = self.initial_cluster()
        released = [
            LabeledSegment(start=te.start, end=te.end, label=label)
            for te, label in zip(self.stash, labels)
        ]
        self.emitted.extend(released)
        self.stash = []
        self.phase = Phase.ONLINE
        return released

    def initial_cluster(self) -> List[int]:
        """Офлайн AHC по накопленным эмбеддингам и инициализация буферов

        Число спикеров выбирается по максимуму силуэта на [1, max_initial_speakers].
        """
        x = np.stack([te.embedding for te in self.stash])
        dist = pairwise_distances(x)
        dendrogram = ahc_build(dist)
        k_max = min(self.config.max_initial_speakers, len(self.stash))
        k_best, labeling = estimate_count(dist, dendrogram, 1, k_max)

        for row in x:
            self.checkpoint.add(row)
        labels = []
        for cluster in range(labeling.k):
            members = labeling.members(cluster)
            mean = x[members].mean(axis=0)
            if is_degenerate(mean):
                logger.warning(f"⚠️ Вырожденный центроид кластера {cluster}, берётся первый эмбеддинг")
                mean = x[members[0]]
            label = self.centroids.new_centroid(mean, usage=len(members), weight=len(members))
            labels.append(label)
        self.current_k = k_best
        logger.info(f"✅ Начальная кластеризация: {k_best} спикер(ов) по {len(self.stash)} эмбеддингам")
        return [labels[c] for c in labeling.assignments]

    def decide_k(self, e: np.ndarray) -> Decision:
        """Сравнивает силуэт для k-1, k, k+1 на чекпоинтах и новом эмбеддинге"""
        working = np.vstack([self.checkpoint.snapshot(), e[None, :]])
        dist = pairwise_distances(working)
        dendrogram = ahc_build(dist)
        k = self.current_k
        candidates = [c for c in (k - 1, k, k + 1) if 1 <= c <= working.shape[0]]
        if not candidates:
            return Decision(previous_k=k, chosen_k=k, scores={})

        scores: Dict[int, float] = {}
        chosen, best = None, None
        for candidate in candidates:
            score, _ = score_candidate(dist, dendrogram, candidate)
            scores[candidate] = score
            if best is None or score > best + SCORE_TIE_TOL:
                chosen, best = candidate, score
        return Decision(previous_k=k, chosen_k=chosen, scores=scores)

    def online_step(self, te: TimedEmbedding) -> LabeledSegment:
        """Один шаг онлайн-фазы: решение о числе спикеров и выдача метки"""
        e = te.embedding
        decision = self.decide_k(e)
        self.decisions.append(decision)

        if decision.chosen_k > self.current_k:
            label = self.centroids.new_centroid(e)
            self.checkpoint.add(e)
            self.current_k += 1
            logger.info(f"Новый спикер: метка {label}, k={self.current_k}")
        else:
            if decision.chosen_k < self.current_k and self._decrease_confirmed(decision):
                self._merge_closest_centroids()
                self.current_k -= 1
            label = self.map_label(e)
            self.centroids.assign(label, e)
            self.checkpoint.add(e)

        segment = LabeledSegment(start=te.start, end=te.end, label=label)
        self.emitted.append(segment)
        return segment

    def _decrease_confirmed(self, decision: Decision) -> bool:
        gain = decision.scores[decision.chosen_k] - decision.scores.get(decision.previous_k, 0.0)
        if gain < DECREASE_MARGIN:
            logger.debug(f"k-1 отклонено: выигрыш силуэта {gain:.4f} < {DECREASE_MARGIN}")
            return False
        return True

    def _merge_closest_centroids(self) -> None:
        labels, vectors = self.centroids.vectors()
        if len(labels) < 2:
            return
        dist = pairwise_distances(vectors)
        n = len(labels)
        upper = np.triu(np.ones((n, n), dtype=bool), k=1)
        i, j = divmod(int(np.argmin(np.where(upper, dist, np.inf))), n)
        survivor = self.centroids.merge(labels[i], labels[j])
        logger.info(f"Уменьшение числа спикеров: {labels[i]} и {labels[j]} -> {survivor}")

    def map_label(self, e: np.ndarray) -> int:
        """Метка через кластеризацию центроидов

        Ищется ближайший центроид, затем в его кластере - самый
        используемый (при равенстве - с меньшей меткой).
        """
        labels, vectors = self.centroids.vectors()
        if not labels:
            raise ValueError("Нет живых центроидов для выбора метки")
        if len(labels) == 1:
            return labels[0]

        clusters = cut_threshold(ahc_build(pairwise_distances(vectors)), self.config.centroid_link_threshold)
        sims = vectors @ (e / np.linalg.norm(e))
        closest = int(np.argmax(sims))
        group = clusters.members(clusters.assignments[closest])
        best = max(group, key=lambda idx: (self.centroids.centroids[labels[idx]].usage, -labels[idx]))
        return labels[best]


def diarize_stream(stream: Sequence[TimedEmbedding], config: Optional[DiarizerConfig] = None) -> OnlineDiarizer:
    """Прогоняет весь поток через новую сессию, включая сброс остатка в конце"""
    diarizer = OnlineDiarizer(config)
    for te in stream:
        diarizer.push(te)
    diarizer.finalize()
    return diarizer


def online_step_times(diarizer: OnlineDiarizer) -> List[float]:
    """Времена шагов онлайн-фазы (без накопления и начальной кластеризации)"""
    online = diarizer.step_times[diarizer.config.n_init:]
    return online or list(diarizer.step_times)
