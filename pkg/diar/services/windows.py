"""
Окна по оракульной разметке речи и обратное преобразование
меток окон в сегменты.

Все границы считаются в целых микросекундах.
"""
from typing import List, Sequence, Tuple, Union
import logging

from diar.models.core import Annotation, LabeledSegment, merge_intervals, seconds_to_us

logger = logging.getLogger(__name__)

US = 1_000_000

SpeechInput = Union[Annotation, Sequence[Tuple[float, float]]]


def speaker_name(label: int) -> str:
    return f"spk{label}"


def plan_windows(speech: SpeechInput, window_len: float, shift: float) -> List[Tuple[float, float]]:
    """Скользящие окна внутри каждой речевой области

    Окно, выходящее за конец области, обрезается по нему; область
    не длиннее окна даёт одно окно на всю область. Окна не пересекают
    паузы между областями.
    """
    if not 0 < shift <= window_len:
        raise ValueError(f"Требуется 0 < shift <= window_len, получено {shift} / {window_len}")
    if isinstance(speech, Annotation):
        regions = speech.speech_regions()
    else:
        regions = merge_intervals(speech)

    length_us, shift_us = seconds_to_us(window_len), seconds_to_us(shift)
    windows = []
    for start, end in regions:
        s, e = seconds_to_us(start), seconds_to_us(end)
        if e <= s:
            continue
        if e - s <= length_us:
            windows.append((s, e))
            continue
        begin = s
        while begin < e:
            windows.append((begin, min(begin + length_us, e)))
            begin += shift_us
    return [(s / US, e / US) for s, e in windows]


def segments_from_labels(emitted: Sequence[LabeledSegment], uri: str = "session") -> Annotation:
    """Склеивает размеченные окна в сегменты разметки

    Соседние и перекрывающиеся окна одной метки сливаются. Если
    перекрываются окна разных меток, граница ставится в середину
    перекрытия. Каждый момент времени достаётся ровно одной метке.
    """
    annotation = Annotation(uri=uri)
    current = None  # [start, end, label] в мкс
    floor = None    # конец последнего выданного сегмента

    def flush(segment):
        nonlocal floor
        start, end, label = segment
        if end > start:
            annotation.add(start / US, end / US, speaker_name(label))
            floor = end

    for window in emitted:
        ws, we = seconds_to_us(window.start), seconds_to_us(window.end)
        if floor is not None:
            ws = max(ws, floor)
        if we <= ws:
            continue

        if current is None:
            current = [ws, we, window.label]
            continue

        cs, ce, label = current
        if window.label == label:
            if ws <= ce:
                current[1] = max(ce, we)
            else:
                flush(current)
                current = [ws, we, window.label]
        elif ws < ce:
            if we <= ce:
                # Окно целиком внутри текущего сегмента
                continue
            boundary = max((ws + ce) // 2, cs)
            flush([cs, boundary, label])
            current = [boundary, we, window.label]
        else:
            flush(current)
            current = [ws, we, window.label]

    if current is not None:
        flush(current)
    return annotation
