import numpy as np
import pytest

from diar.models.core import EmbeddingError
from diar.services.stream_io import (
    MAGIC,
    StreamFormatError,
    load_embeddings,
    make_records,
    read_records,
    record_dtype,
    write_stream,
)


def sample_records(rng, n=5, dim=4):
    starts = np.arange(n) * 0.5
    return make_records(starts, starts + 1.5, rng.standard_normal((n, dim)))


class TestStreamFile:
    def test_round_trip_bit_exact(self, tmp_path, rng):
        """Records read back byte for byte"""
        records = sample_records(rng)
        path = tmp_path / "s.sdeb"
        write_stream(path, records)
        assert read_records(path).tobytes() == records.tobytes()

    def test_layout(self, tmp_path, rng):
        """Text header followed by little-endian records of 16 + 4*D bytes"""
        records = sample_records(rng, n=3, dim=2)
        path = tmp_path / "s.sdeb"
        write_stream(path, records)
        raw = path.read_bytes()
        header = MAGIC + b"2\n3\n"
        assert raw.startswith(header)
        assert len(raw) == len(header) + 3 * (16 + 4 * 2)
        first_start = np.frombuffer(raw[len(header):len(header) + 8], dtype="<f8")[0]
        assert first_start == 0.0

    def test_empty_stream(self, tmp_path):
        """N = 0 is a valid file"""
        path = tmp_path / "empty.sdeb"
        write_stream(path, np.zeros(0, dtype=record_dtype(8)))
        dim, stream = load_embeddings(path)
        assert dim == 8 and stream == []

    def test_bad_magic(self, tmp_path):
        """Files without the signature are rejected"""
        path = tmp_path / "bad.sdeb"
        path.write_bytes(b"NOPE!\n4\n0\n")
        with pytest.raises(StreamFormatError):
            read_records(path)

    def test_truncated_body(self, tmp_path, rng):
        """A body shorter than N records is rejected"""
        path = tmp_path / "s.sdeb"
        write_stream(path, sample_records(rng))
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(StreamFormatError):
            read_records(path)

    def test_bad_header_number(self, tmp_path):
        """Non-numeric D is rejected"""
        path = tmp_path / "s.sdeb"
        path.write_bytes(MAGIC + b"abc\n0\n")
        with pytest.raises(StreamFormatError):
            read_records(path)

    def test_out_of_order_rejected(self, tmp_path, rng):
        """Records must be ordered by start time"""
        records = make_records([0.0, 1.0, 0.5], [1.5, 2.5, 2.0], rng.standard_normal((3, 4)))
        path = tmp_path / "s.sdeb"
        write_stream(path, records)
        with pytest.raises(StreamFormatError, match="позиция 2"):
            read_records(path)

    def test_load_normalizes(self, tmp_path, rng):
        """Loaded embeddings have unit norm and keep their times"""
        path = tmp_path / "s.sdeb"
        write_stream(path, sample_records(rng))
        dim, stream = load_embeddings(path)
        assert dim == 4
        assert [te.start for te in stream] == [0.0, 0.5, 1.0, 1.5, 2.0]
        for te in stream:
            assert np.linalg.norm(te.embedding) == pytest.approx(1.0)

    def test_zero_vector_reports_position(self, tmp_path):
        """A zero embedding is rejected with its position"""
        vectors = np.array([[1.0, 0.0], [0.0, 0.0]])
        path = tmp_path / "s.sdeb"
        write_stream(path, make_records([0.0, 0.5], [1.5, 2.0], vectors))
        with pytest.raises(EmbeddingError) as exc:
            load_embeddings(path)
        assert exc.value.position == 1
