"""
Агломеративная кластеризация (среднее связывание), силуэт
и оценка числа спикеров по максимуму силуэта.
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple
import logging

import numpy as np
from sklearn.metrics import silhouette_score

from diar.services.geometry import check_distance_matrix

logger = logging.getLogger(__name__)

# Разница оценок, ниже которой кандидаты считаются равными
SCORE_TIE_TOL = 1e-12


@dataclass(frozen=True)
class Merge:
    """Одно слияние дендрограммы: узлы-потомки, расстояние связывания, размер"""

    left: int
    right: int
    distance: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Дерево слияний над n листьями

    Листья имеют номера 0..n-1, слияние i создаёт узел n+i.
    """

    n: int
    merges: Tuple[Merge, ...]


@dataclass(frozen=True)
class ClusterLabeling:
    """Плотные номера кластеров 0..k-1 в порядке первого появления"""

    assignments: Tuple[int, ...]
    k: int

    def as_array(self) -> np.ndarray:
        return np.asarray(self.assignments, dtype=np.int64)

    def members(self, cluster: int) -> List[int]:
        return [i for i, c in enumerate(self.assignments) if c == cluster]


def ahc_build(dist, linkage: str = "average") -> Dendrogram:
    """Строит полное дерево слияний со средним связыванием

    Расстояния пересчитываются формулой Ланса–Уильямса. Кластер хранится
    в строке своего наименьшего листа; при равных расстояниях сливается
    лексикографически наименьшая пара таких строк.
    """
    if linkage != "average":
        raise ValueError(f"Поддерживается только среднее связывание, получено {linkage!r}")
    d = check_distance_matrix(dist).copy()
    n = d.shape[0]

    # Рабочая матрица: верхний треугольник активных кластеров
    idx = np.arange(n)
    work = np.where(idx[:, None] < idx[None, :], d, np.inf)
    sizes = np.ones(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    node_of = np.arange(n)
    merges: List[Merge] = []

    for step in range(n - 1):
        # argmin по строкам даёт наименьшую пару (i, j) среди равных
        i, j = divmod(int(np.argmin(work)), n)
        distance = float(work[i, j])
        si, sj = sizes[i], sizes[j]

        merged = (si * d[i] + sj * d[j]) / (si + sj)
        d[i, :] = merged
        d[:, i] = merged
        d[i, i] = 0.0

        merges.append(Merge(left=int(node_of[i]), right=int(node_of[j]),
                            distance=distance, size=int(si + sj)))
        sizes[i] = si + sj
        node_of[i] = n + step
        active[j] = False

        work[j, :] = np.inf
        work[:, j] = np.inf
        after = active & (idx > i)
        before = active & (idx < i)
        work[i, after] = merged[after]
        work[before, i] = merged[before]

    return Dendrogram(n=n, merges=tuple(merges))


def _node_leaves(dendrogram: Dendrogram) -> List[int]:
    """Для каждого узла (листья и слияния) - один лист-представитель"""
    leaf_of = list(range(dendrogram.n))
    for merge in dendrogram.merges:
        leaf_of.append(leaf_of[merge.left])
    return leaf_of


def cut_threshold(dendrogram: Dendrogram, t: float) -> ClusterLabeling:
    """Кластеры из всех слияний с расстоянием связывания < t"""
    if t < 0:
        raise ValueError(f"Порог должен быть неотрицательным, получено {t}")
    applied = [m for m in dendrogram.merges if m.distance < t]
    return _apply_merges(dendrogram, applied)


def cut_count(dendrogram: Dendrogram, k: int) -> ClusterLabeling:
    """Ровно k кластеров: отменяются последние k-1 слияний"""
    n = dendrogram.n
    if not 1 <= k <= n:
        raise ValueError(f"Число кластеров должно быть в [1, {n}], получено {k}")
    return _apply_merges(dendrogram, dendrogram.merges[: n - k])


def _apply_merges(dendrogram: Dendrogram, merges: Sequence[Merge]) -> ClusterLabeling:
    n = dendrogram.n
    leaf_of = _node_leaves(dendrogram)
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for merge in merges:
        ra, rb = find(leaf_of[merge.left]), find(leaf_of[merge.right])
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    dense = {}
    assignments = []
    for leaf in range(n):
        root = find(leaf)
        if root not in dense:
            dense[root] = len(dense)
        assignments.append(dense[root])
    return ClusterLabeling(assignments=tuple(assignments), k=len(dense))


def silhouette(dist, labeling: ClusterLabeling) -> float:
    """Средний коэффициент силуэта по точкам

    Для точек одноэлементных кластеров s(i) = 0, при max(a, b) = 0 тоже 0.
    """
    d = np.asarray(dist, dtype=np.float64)
    n = d.shape[0]
    if labeling.k < 2 or n < 2:
        raise ValueError("Силуэт определён только для k >= 2 (для k = 1 используйте score_candidate)")
    if len(labeling.assignments) != n:
        raise ValueError(f"Разметка длины {len(labeling.assignments)} не соответствует матрице {n}×{n}")
    if labeling.k == n:
        # Все кластеры одноэлементные
        return 0.0
    return float(silhouette_score(d, labeling.as_array(), metric="precomputed"))


def score_candidate(dist, dendrogram: Dendrogram, k: int) -> Tuple[float, ClusterLabeling]:
    """Разрез на k кластеров и его силуэт; для k = 1 оценка равна 0"""
    labeling = cut_count(dendrogram, k)
    if k == 1:
        return 0.0, labeling
    return silhouette(dist, labeling), labeling


def estimate_count(dist, dendrogram: Dendrogram, k_min: int, k_max: int) -> Tuple[int, ClusterLabeling]:
    """Число кластеров с максимальным силуэтом на [k_min, k_max]

    При равенстве оценок побеждает меньшее k.
    """
    if not 1 <= k_min <= k_max <= dendrogram.n:
        raise ValueError(f"Некорректный диапазон [{k_min}, {k_max}] для {dendrogram.n} точек")
    best_k, best_score, best_labeling = None, None, None
    for k in range(k_min, k_max + 1):
        score, labeling = score_candidate(dist, dendrogram, k)
        logger.debug(f"k={k}: силуэт {score:.4f}")
        if best_score is None or score > best_score + SCORE_TIE_TOL:
            best_k, best_score, best_labeling = k, score, labeling
    return best_k, best_labeling
