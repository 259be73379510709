from pathlib import Path
import argparse
import logging

from diar.handlers.common import EXIT_OK, audio_duration, build_config, mean_std
from diar.models.core import Annotation
from diar.services.diarizer import diarize_stream, online_step_times
from diar.services.offline import offline_diarize
from diar.services.rttm import write_rttm
from diar.services.state_dump_service import StateDumpService
from diar.services.stream_io import load_embeddings
from diar.services.windows import segments_from_labels
from diar.utils.config import (
    CENTROID_THRESHOLD,
    MAX_INITIAL_SPEAKERS,
    N_CKPT,
    N_INIT,
    STATE_DB_URL,
)

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("diarize", help="онлайн-диаризация потока эмбеддингов в RTTM")
    parser.add_argument("--embeddings", required=True, help="файл потока SDEB1")
    parser.add_argument("--out", required=True, help="куда записать RTTM гипотезы")
    parser.add_argument("--n-init", type=int, default=N_INIT, help=f"порог фазы накопления (по умолчанию {N_INIT})")
    parser.add_argument("--n-ckpt", type=int, default=N_CKPT, help=f"ёмкость буфера чекпоинтов (по умолчанию {N_CKPT})")
    parser.add_argument("--centroid-threshold", type=float, default=CENTROID_THRESHOLD,
                        help=f"порог кластеризации центроидов (по умолчанию {CENTROID_THRESHOLD})")
    parser.add_argument("--max-speakers", type=int, default=MAX_INITIAL_SPEAKERS,
                        help=f"максимум спикеров при начальной кластеризации (по умолчанию {MAX_INITIAL_SPEAKERS})")
    parser.add_argument("--rtf-report", default=None, help="файл отчёта о задержках и RTF")
    parser.add_argument("--offline", action="store_true", help="офлайн-базовая система вместо онлайн")
    parser.add_argument("--state-db", default=STATE_DB_URL, help="URL SQLAlchemy для снимка состояния")
    parser.add_argument("--uri", default=None, help="идентификатор файла в RTTM (по умолчанию имя потока)")
    parser.set_defaults(handler=handle_diarize)


def write_rtf_report(path: str, step_times, online_times, duration: float) -> None:
    """Задержки по шагам (мс), их среднее и std, RTF"""
    mean_ms, std_ms = mean_std([t * 1000.0 for t in online_times])
    total = sum(step_times)
    rtf = total / duration if duration > 0 else 0.0
    with open(path, "w", encoding="utf-8") as f:
        f.write("# step latency_ms\n")
        for step, seconds in enumerate(step_times):
            f.write(f"{step} {seconds * 1000.0:.4f}\n")
        f.write(f"mean_ms={mean_ms:.4f}\n")
        f.write(f"std_ms={std_ms:.4f}\n")
        f.write(f"processing_s={total:.6f}\n")
        f.write(f"audio_s={duration:.3f}\n")
        f.write(f"rtf={rtf:.6f}\n")
    logger.info(f"Отчёт о задержках записан в {path}: среднее {mean_ms:.2f} мс, RTF {rtf:.5f}")


def handle_diarize(args: argparse.Namespace) -> int:
    """Обрабатывает команду diarize"""
    dim, stream = load_embeddings(args.embeddings)
    config = build_config(args.n_init, args.n_ckpt, args.centroid_threshold, dim, args.max_speakers)
    uri = args.uri or Path(args.embeddings).stem

    if not stream:
        logger.warning("⚠️ Пустой поток эмбеддингов, записывается пустой RTTM")
        write_rttm(args.out, Annotation(uri=uri))
        return EXIT_OK

    if args.offline:
        emitted = offline_diarize(stream, max_speakers=config.max_initial_speakers)
        diarizer = None
    else:
        diarizer = diarize_stream(stream, config)
        emitted = diarizer.emitted
        logger.info(
            f"✅ Онлайн-диаризация: {len(emitted)} окон, {diarizer.centroids.live_count} живых центроидов, "
            f"{len({seg.label for seg in emitted})} выданных меток"
        )

    write_rttm(args.out, segments_from_labels(emitted, uri=uri))

    if diarizer is not None:
        if args.rtf_report:
            write_rtf_report(args.rtf_report, diarizer.step_times, online_step_times(diarizer),
                             audio_duration(stream))
        if args.state_db:
            StateDumpService(args.state_db).save_state(diarizer, uri=uri)
    return EXIT_OK
