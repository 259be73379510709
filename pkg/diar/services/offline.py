from typing import List, Sequence
import logging

import numpy as np

from diar.models.core import LabeledSegment, TimedEmbedding, normalize
from diar.services.clustering import ahc_build, estimate_count
from diar.services.geometry import pairwise_distances

logger = logging.getLogger(__name__)


def offline_diarize(stream: Sequence[TimedEmbedding], max_speakers: int = 5) -> List[LabeledSegment]:
    """Офлайн-базовая система: AHC по всей сессии и выбор числа спикеров по силуэту

    Args:
        stream: все эмбеддинги сессии
        max_speakers: верхняя граница перебора числа спикеров

    Returns:
        По одному сегменту на эмбеддинг, метки в порядке первого появления
    """
    if not stream:
        return []
    x = np.stack([normalize(te.embedding, position=i) for i, te in enumerate(stream)])
    dist = pairwise_distances(x)
    dendrogram = ahc_build(dist)
    k_best, labeling = estimate_count(dist, dendrogram, 1, min(max_speakers, len(stream)))
    logger.info(f"✅ Офлайн-кластеризация: {k_best} спикер(ов) по {len(stream)} эмбеддингам")
    return [
        LabeledSegment(start=te.start, end=te.end, label=label)
        for te, label in zip(stream, labeling.assignments)
    ]
