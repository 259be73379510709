from typing import Sequence

import numpy as np
from sklearn.metrics.pairwise import cosine_distances

# Норма, ниже которой среднее считается вырожденным (например, v и -v)
DEGENERATE_NORM = 1e-12
SYMMETRY_TOL = 1e-9


def _pair(a: Sequence[float], b: Sequence[float]):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"Размерности векторов не совпадают: {a.shape} и {b.shape}")
    return a, b


def cosine_similarity(a: Sequence[float], b: Sequence[float]) -> float:
    """Косинусное сходство, ограниченное отрезком [-1, 1]"""
    a, b = _pair(a, b)
    denom = float(np.linalg.norm(a) * np.linalg.norm(b))
    if denom == 0.0:
        raise ValueError("Косинусное сходство не определено для нулевого вектора")
    return float(np.clip(np.dot(a, b) / denom, -1.0, 1.0))


def cosine_distance(a: Sequence[float], b: Sequence[float]) -> float:
    """1 - косинусное сходство, в диапазоне [0, 2]"""
    return 1.0 - cosine_similarity(a, b)


def pairwise_distances(embs) -> np.ndarray:
    """Матрица косинусных расстояний n×n

    Нулевая диагональ, симметрия, значения в [0, 2]. Масштаб векторов
    не важен, поэтому сюда можно передавать ненормированные средние.
    """
    x = np.asarray(embs, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("Для матрицы расстояний нужен хотя бы один вектор")
    if np.any(np.linalg.norm(x, axis=1) == 0.0):
        raise ValueError("Матрица расстояний не определена для нулевых векторов")
    dist = cosine_distances(x)
    dist = np.clip((dist + dist.T) / 2.0, 0.0, 2.0)
    np.fill_diagonal(dist, 0.0)
    return dist


def check_distance_matrix(dist) -> np.ndarray:
    """Проверяет, что матрица квадратная и симметричная"""
    d = np.asarray(dist, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] == 0:
        raise ValueError(f"Ожидалась непустая квадратная матрица, получена форма {d.shape}")
    if not np.allclose(d, d.T, rtol=0.0, atol=SYMMETRY_TOL):
        raise ValueError("Матрица расстояний несимметрична")
    return d


def weighted_mean(embs, weights: Sequence[float]) -> np.ndarray:
    """Взвешенное среднее Σ w·v / Σ w без перенормировки

    Вызывающий код сам проверяет результат на вырожденность
    (см. is_degenerate): для v и -v среднее равно нулю.
    """
    x = np.asarray(embs, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if x.ndim != 2 or w.ndim != 1 or x.shape[0] != w.shape[0] or x.shape[0] == 0:
        raise ValueError(
            f"Число векторов ({x.shape[0] if x.ndim else 0}) и весов ({w.shape[0] if w.ndim else 0}) не совпадает"
        )
    if np.any(w <= 0):
        raise ValueError("Все веса должны быть положительными")
    return (w[:, None] * x).sum(axis=0) / w.sum()


def is_degenerate(v) -> bool:
    return float(np.linalg.norm(v)) < DEGENERATE_NORM
