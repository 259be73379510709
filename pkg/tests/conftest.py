import numpy as np
import pytest

from diar.models.core import DiarizerConfig
from diar.services.rttm import write_rttm
from diar.services.stream_io import load_embeddings, write_stream
from diar.services.synthetic import SyntheticSpec, generate_synthetic


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_config():
    return DiarizerConfig(n_init=4, n_ckpt=4, dim=4)


@pytest.fixture
def session_files(tmp_path):
    """Write a synthetic session to disk and return (embeddings path, reference path, reference)"""

    def make(n_speakers: int = 2, duration: float = 120.0, seed: int = 7, **kwargs):
        records, reference = generate_synthetic(
            SyntheticSpec(n_speakers=n_speakers, duration=duration, seed=seed, **kwargs)
        )
        emb_path = tmp_path / f"session_{seed}.sdeb"
        ref_path = tmp_path / f"session_{seed}.rttm"
        write_stream(emb_path, records)
        write_rttm(ref_path, reference)
        return emb_path, ref_path, reference

    return make


@pytest.fixture
def synthetic_stream(tmp_path):
    """Generated session as a normalized TimedEmbedding stream plus its reference"""

    def make(n_speakers: int, duration: float, seed: int, **kwargs):
        records, reference = generate_synthetic(
            SyntheticSpec(n_speakers=n_speakers, duration=duration, seed=seed, **kwargs)
        )
        path = tmp_path / f"stream_{seed}.sdeb"
        write_stream(path, records)
        dim, stream = load_embeddings(path)
        return dim, stream, reference

    return make
