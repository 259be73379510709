from pathlib import Path
from typing import Optional, Union
import logging

from diar.models.core import Annotation, Segment

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

RTTM_FIELDS = 10


class RttmFormatError(ValueError):
    """Ошибка разбора RTTM с номером строки"""

    def __init__(self, message: str, line_no: int):
        self.line_no = line_no
        super().__init__(f"Строка {line_no}: {message}")


class RttmParser:
    """Парсер строк RTTM (10 полей, учитываются только строки SPEAKER)"""

    @staticmethod
    def parse_line(line: str, line_no: int) -> Optional[Segment]:
        """
        Разбирает одну строку RTTM

        Returns:
            Сегмент или None для пустых строк, не-SPEAKER строк
            и сегментов нулевой длительности
        """
        fields = line.split()
        if not fields or fields[0] != "SPEAKER":
            return None
        if len(fields) != RTTM_FIELDS:
            raise RttmFormatError(f"ожидалось {RTTM_FIELDS} полей, получено {len(fields)}", line_no)
        try:
            start = float(fields[3])
            duration = float(fields[4])
        except ValueError:
            raise RttmFormatError(f"некорректное время: {fields[3]!r} {fields[4]!r}", line_no)
        if duration < 0:
            raise RttmFormatError(f"отрицательная длительность {duration}", line_no)
        if duration == 0:
            logger.warning(f"⚠️ Строка {line_no}: сегмент нулевой длительности пропущен")
            return None
        return Segment(start=start, duration=duration, speaker=fields[7])

    @staticmethod
    def format_segment(uri: str, segment: Segment) -> str:
        return (
            f"SPEAKER {uri} 1 {segment.start:.3f} {segment.duration:.3f} "
            f"<NA> <NA> {segment.speaker} <NA> <NA>"
        )


def read_rttm(path: PathLike) -> Annotation:
    """Читает RTTM-файл; uri берётся из первой строки SPEAKER"""
    annotation = Annotation(uri=Path(path).stem)
    uri_seen = False
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            segment = RttmParser.parse_line(line, line_no)
            if segment is None:
                continue
            if not uri_seen:
                annotation.uri = line.split()[1]
                uri_seen = True
            annotation.segments.append(segment)
    logger.info(f"Прочитан RTTM {path}: {len(annotation.segments)} сегментов, "
                f"{len(annotation.speakers())} спикер(ов)")
    return annotation


def write_rttm(path: PathLike, annotation: Annotation) -> None:
    """Записывает разметку в RTTM с тремя знаками после запятой"""
    with open(path, "w", encoding="utf-8") as f:
        for segment in sorted(annotation.segments):
            f.write(RttmParser.format_segment(annotation.uri, segment) + "\n")
    logger.info(f"✅ Записан RTTM {path}: {len(annotation.segments)} сегментов")
