"""
Метрики диаризации: DER (FA + MS + SC) с колларом, JER и оптимальное
сопоставление спикеров эталона и гипотезы.

Все времена внутри переводятся в целые микросекунды.
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
from scipy.optimize import linear_sum_assignment

from diar.models.core import Annotation, merge_intervals, seconds_to_us

logger = logging.getLogger(__name__)

US = 1e6


@dataclass(frozen=True)
class DerBreakdown:
    """Доли ошибок от суммарного времени речи эталона и их длительности (с)"""

    der: float
    fa: float
    ms: float
    sc: float
    scored_time: float
    fa_time: float
    ms_time: float
    sc_time: float

    @property
    def error_time(self) -> float:
        return self.fa_time + self.ms_time + self.sc_time


def _speaker_tracks(annotation: Annotation) -> Tuple[List[str], List[List[Tuple[int, int]]]]:
    speakers = annotation.speakers()
    tracks = []
    for speaker in speakers:
        intervals = [
            (seconds_to_us(start), seconds_to_us(end))
            for start, end in annotation.speaker_intervals(speaker)
        ]
        tracks.append([(s, e) for s, e in merge_intervals(intervals) if e > s])
    return speakers, tracks


def _activity(intervals: Sequence[Tuple[int, int]], starts: np.ndarray) -> np.ndarray:
    """Для каждого элементарного интервала - покрыт ли он списком интервалов"""
    if not intervals:
        return np.zeros(starts.shape[0], dtype=bool)
    begins = np.array([s for s, _ in intervals], dtype=np.int64)
    ends = np.array([e for _, e in intervals], dtype=np.int64)
    pos = np.searchsorted(begins, starts, side="right") - 1
    inside = pos >= 0
    inside[inside] = starts[inside] < ends[pos[inside]]
    return inside


def _activity_matrix(tracks, starts: np.ndarray) -> np.ndarray:
    matrix = np.zeros((len(tracks), starts.shape[0]), dtype=bool)
    for row, track in enumerate(tracks):
        matrix[row] = _activity(track, starts)
    return matrix


class _Timeline:
    """Разбиение оси времени на однородные участки"""

    def __init__(self, ref: Annotation, hyp: Annotation, collar: float = 0.0):
        self.ref_speakers, ref_tracks = _speaker_tracks(ref)
        self.hyp_speakers, hyp_tracks = _speaker_tracks(hyp)

        half = seconds_to_us(collar / 2.0) if collar > 0 else 0
        zones = []
        if half > 0:
            for track in ref_tracks:
                for s, e in track:
                    zones.extend([(s - half, s + half), (e - half, e + half)])
            zones = merge_intervals(zones)

        points = {p for track in ref_tracks + hyp_tracks for interval in track for p in interval}
        points.update(p for zone in zones for p in zone)
        bounds = np.array(sorted(points), dtype=np.int64)
        if bounds.shape[0] < 2:
            bounds = np.zeros(2, dtype=np.int64)
        starts = bounds[:-1]

        self.durations = np.diff(bounds)
        scored = ~_activity(zones, starts)
        self.durations = np.where(scored, self.durations, 0)
        self.ref_active = _activity_matrix(ref_tracks, starts)
        self.hyp_active = _activity_matrix(hyp_tracks, starts)

    def overlap_matrix(self) -> np.ndarray:
        """Длительности совместной речи ref×hyp (мкс)"""
        weighted = self.ref_active.astype(np.int64) * self.durations[None, :]
        return weighted @ self.hyp_active.astype(np.int64).T


def _assign(overlap: np.ndarray) -> List[Tuple[int, int]]:
    """Взаимно однозначное сопоставление с максимальным суммарным перекрытием"""
    if overlap.size == 0:
        return []
    rows, cols = linear_sum_assignment(overlap, maximize=True)
    return [(int(r), int(c)) for r, c in zip(rows, cols) if overlap[r, c] > 0]


def overlap_matrix(ref: Annotation, hyp: Annotation) -> Tuple[List[str], List[str], np.ndarray]:
    """Спикеры эталона, спикеры гипотезы и матрица перекрытий в секундах"""
    timeline = _Timeline(ref, hyp)
    return timeline.ref_speakers, timeline.hyp_speakers, timeline.overlap_matrix() / US


def optimal_mapping(ref: Annotation, hyp: Annotation) -> Dict[str, str]:
    """Частичная биекция спикер эталона -> спикер гипотезы по всей оси времени"""
    timeline = _Timeline(ref, hyp)
    pairs = _assign(timeline.overlap_matrix())
    return {timeline.ref_speakers[r]: timeline.hyp_speakers[h] for r, h in pairs}


def der(ref: Annotation, hyp: Annotation, collar: float = 0.0) -> DerBreakdown:
    """DER в соглашении md-eval/dscore

    Коллар исключает ±collar/2 вокруг каждой границы эталона. Сопоставление
    спикеров строится по оцениваемым участкам, поэтому минимизирует ошибку.
    """
    if collar < 0:
        raise ValueError(f"Коллар должен быть неотрицательным, получено {collar}")
    if ref.is_empty():
        raise ValueError("Пустой эталон: DER не определён")

    timeline = _Timeline(ref, hyp, collar)
    pairs = _assign(timeline.overlap_matrix())

    n_ref = timeline.ref_active.sum(axis=0).astype(np.int64)
    n_hyp = timeline.hyp_active.sum(axis=0).astype(np.int64)
    correct = np.zeros_like(n_ref)
    for r, h in pairs:
        correct += (timeline.ref_active[r] & timeline.hyp_active[h]).astype(np.int64)

    dur = timeline.durations
    total = int((n_ref * dur).sum())
    ms = int((np.maximum(0, n_ref - n_hyp) * dur).sum())
    fa = int((np.maximum(0, n_hyp - n_ref) * dur).sum())
    sc = int(((np.minimum(n_ref, n_hyp) - correct) * dur).sum())

    if total == 0:
        logger.warning("⚠️ Коллар исключил всю речь эталона, оценивать нечего")
        return DerBreakdown(der=0.0, fa=0.0, ms=0.0, sc=0.0, scored_time=0.0,
                            fa_time=fa / US, ms_time=ms / US, sc_time=sc / US)
    fa_frac, ms_frac, sc_frac = fa / total, ms / total, sc / total
    return DerBreakdown(
        der=fa_frac + ms_frac + sc_frac,
        fa=fa_frac,
        ms=ms_frac,
        sc=sc_frac,
        scored_time=total / US,
        fa_time=fa / US,
        ms_time=ms / US,
        sc_time=sc / US,
    )


def jer(ref: Annotation, hyp: Annotation) -> float:
    """Средняя по спикерам эталона ошибка Жаккара; несопоставленные дают 1"""
    if ref.is_empty():
        raise ValueError("Пустой эталон: JER не определён")
    timeline = _Timeline(ref, hyp)
    mapped: Dict[int, Optional[int]] = {r: h for r, h in _assign(timeline.overlap_matrix())}

    errors = []
    for r in range(len(timeline.ref_speakers)):
        h = mapped.get(r)
        if h is None:
            errors.append(1.0)
            continue
        ref_on, hyp_on = timeline.ref_active[r], timeline.hyp_active[h]
        inter = int(timeline.durations[ref_on & hyp_on].sum())
        union = int(timeline.durations[ref_on | hyp_on].sum())
        errors.append(1.0 - inter / union if union else 1.0)
    return float(np.mean(errors))
