from typing import List, Sequence

import numpy as np

from diar.models.core import Annotation, TimedEmbedding


def timed_stream(vectors: Sequence[Sequence[float]], shift: float = 0.5, length: float = 1.5) -> List[TimedEmbedding]:
    """Embeddings on a regular 1.5 s / 0.5 s window grid"""
    return [
        TimedEmbedding(embedding=np.asarray(v, dtype=np.float64), start=i * shift, end=i * shift + length)
        for i, v in enumerate(vectors)
    ]


def annotation(*segments, uri: str = "session") -> Annotation:
    """Build an Annotation from (start, end, speaker) triples"""
    result = Annotation(uri=uri)
    for start, end, speaker in segments:
        result.add(start, end, speaker)
    return result


def unit(v: Sequence[float]) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v)
