"""
Файл потока эмбеддингов SDEB1.

Заголовок текстовый: магическая строка "SDEB1\\n", размерность D и
число записей N (каждое - десятичное число на своей строке). Тело -
N записей: start (<f8), end (<f8), D чисел <f4.
"""
from pathlib import Path
from typing import List, Sequence, Tuple, Union
import logging

import numpy as np

from diar.models.core import EmbeddingError, TimedEmbedding, normalize

logger = logging.getLogger(__name__)

MAGIC = b"SDEB1\n"

PathLike = Union[str, Path]


class StreamFormatError(ValueError):
    """Повреждённый или некорректный файл потока"""


def record_dtype(dim: int) -> np.dtype:
    return np.dtype([("start", "<f8"), ("end", "<f8"), ("vec", "<f4", (dim,))])


def make_records(starts: Sequence[float], ends: Sequence[float], vectors) -> np.ndarray:
    """Собирает структурированный массив записей из столбцов"""
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2:
        raise ValueError(f"Ожидалась матрица эмбеддингов N×D, получена форма {vectors.shape}")
    if not len(starts) == len(ends) == vectors.shape[0]:
        raise ValueError("Длины start, end и числа векторов не совпадают")
    records = np.zeros(vectors.shape[0], dtype=record_dtype(vectors.shape[1]))
    records["start"] = starts
    records["end"] = ends
    records["vec"] = vectors
    return records


def record_dim(records: np.ndarray) -> int:
    return int(records.dtype["vec"].shape[0])


def write_stream(path: PathLike, records: np.ndarray) -> None:
    """Записывает поток в формате SDEB1"""
    dim = record_dim(records)
    body = np.ascontiguousarray(records, dtype=record_dtype(dim))
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(f"{dim}\n{body.shape[0]}\n".encode("ascii"))
        f.write(body.tobytes())
    logger.info(f"✅ Записан поток {path}: {body.shape[0]} эмбеддингов, D={dim}")


def _read_header_int(f, name: str, minimum: int) -> int:
    line = f.readline()
    if not line.endswith(b"\n"):
        raise StreamFormatError(f"Обрезанный заголовок: нет строки {name}")
    try:
        value = int(line.decode("ascii").strip())
    except (UnicodeDecodeError, ValueError):
        raise StreamFormatError(f"Строка {name} заголовка не является целым числом: {line!r}")
    if value < minimum:
        raise StreamFormatError(f"Некорректное значение {name} = {value}")
    return value


def read_records(path: PathLike) -> np.ndarray:
    """Читает записи потока без изменений (бит в бит)

    Raises:
        StreamFormatError: неверная сигнатура, заголовок, длина тела
            или нарушен порядок по времени начала
    """
    with open(path, "rb") as f:
        if f.read(len(MAGIC)) != MAGIC:
            raise StreamFormatError(f"Файл {path} не является потоком SDEB1")
        dim = _read_header_int(f, "D", 1)
        count = _read_header_int(f, "N", 0)
        body = f.read()

    dtype = record_dtype(dim)
    if len(body) != count * dtype.itemsize:
        raise StreamFormatError(
            f"Длина тела {len(body)} байт не соответствует N={count} записям по {dtype.itemsize} байт"
        )
    if count == 0:
        return np.zeros(0, dtype=dtype)
    records = np.frombuffer(body, dtype=dtype, count=count).copy()

    starts = records["start"]
    if count > 1:
        broken = np.flatnonzero(np.diff(starts) < 0)
        if broken.size:
            position = int(broken[0]) + 1
            raise StreamFormatError(
                f"Записи не упорядочены по времени: позиция {position}, "
                f"start {starts[position]} < {starts[position - 1]}"
            )
    return records


def load_embeddings(path: PathLike) -> Tuple[int, List[TimedEmbedding]]:
    """Читает поток и возвращает размерность и нормированные эмбеддинги"""
    records = read_records(path)
    dim = record_dim(records)
    stream = []
    for position, record in enumerate(records):
        start, end = float(record["start"]), float(record["end"])
        if not end > start:
            raise StreamFormatError(f"Запись {position}: end {end} <= start {start}")
        try:
            embedding = normalize(record["vec"], dim=dim, position=position)
        except EmbeddingError:
            logger.error(f"Некорректный эмбеддинг в {path}, позиция {position}")
            raise
        stream.append(TimedEmbedding(embedding=embedding, start=start, end=end))
    logger.info(f"Прочитан поток {path}: {len(stream)} эмбеддингов, D={dim}")
    return dim, stream
