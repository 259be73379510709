from typing import Dict, Optional, Sequence, Tuple
import argparse
import logging

from diar.handlers.common import EXIT_OK, UsageError, build_config
from diar.models.core import Annotation, TimedEmbedding
from diar.services.diarizer import diarize_stream
from diar.services.rttm import read_rttm
from diar.services.scoring import der
from diar.services.stream_io import load_embeddings
from diar.services.windows import segments_from_labels
from diar.utils.config import CENTROID_THRESHOLD

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("sweep", help="DER на сетке N_init × N_ckpt")
    parser.add_argument("--embeddings", required=True, help="файл потока SDEB1")
    parser.add_argument("--ref", required=True, help="эталонный RTTM")
    parser.add_argument("--n-init", type=int, nargs="+", default=[30, 60, 120],
                        help="значения N_init (по умолчанию 30 60 120)")
    parser.add_argument("--n-ckpt", type=int, nargs="+", default=[60, 120, 180, 240, 300],
                        help="значения N_ckpt (по умолчанию 60 120 180 240 300)")
    parser.add_argument("--centroid-threshold", type=float, default=CENTROID_THRESHOLD,
                        help=f"порог кластеризации центроидов (по умолчанию {CENTROID_THRESHOLD})")
    parser.add_argument("--collar", type=float, default=0.0, help="коллар в секундах (по умолчанию 0)")
    parser.set_defaults(handler=handle_sweep)


def run_sweep(stream: Sequence[TimedEmbedding], dim: int, reference: Annotation,
              n_init_values: Sequence[int], n_ckpt_values: Sequence[int],
              threshold: float, collar: float) -> Dict[Tuple[int, int], Optional[float]]:
    """DER для каждой пары (N_init, N_ckpt); None для пар с N_init > N_ckpt"""
    table: Dict[Tuple[int, int], Optional[float]] = {}
    for n_init in n_init_values:
        for n_ckpt in n_ckpt_values:
            if n_init > n_ckpt:
                table[(n_init, n_ckpt)] = None
                continue
            config = build_config(n_init, n_ckpt, threshold, dim)
            diarizer = diarize_stream(stream, config)
            hypothesis = segments_from_labels(diarizer.emitted, uri=reference.uri)
            table[(n_init, n_ckpt)] = der(reference, hypothesis, collar=collar).der
            logger.info(f"N_init={n_init}, N_ckpt={n_ckpt}: DER {table[(n_init, n_ckpt)] * 100:.2f}%")
    return table


def format_sweep(table: Dict[Tuple[int, int], Optional[float]],
                 n_init_values: Sequence[int], n_ckpt_values: Sequence[int]) -> str:
    lines = ["N_init\\N_ckpt" + "".join(f"{n_ckpt:>8}" for n_ckpt in n_ckpt_values)]
    for n_init in n_init_values:
        cells = []
        for n_ckpt in n_ckpt_values:
            value = table[(n_init, n_ckpt)]
            cells.append(f"{'-':>8}" if value is None else f"{value * 100:>8.2f}")
        lines.append(f"{n_init:>13}" + "".join(cells))
    lines.append("")
    for (n_init, n_ckpt), value in table.items():
        if value is not None:
            lines.append(f"n_init={n_init} n_ckpt={n_ckpt} der={value * 100:.2f}")
    return "\n".join(lines)


def handle_sweep(args: argparse.Namespace) -> int:
    """Обрабатывает команду sweep"""
    if args.collar < 0:
        raise UsageError(f"Коллар должен быть неотрицательным, получено {args.collar}")
    dim, stream = load_embeddings(args.embeddings)
    reference = read_rttm(args.ref)
    if reference.is_empty():
        raise ValueError(f"Пустой эталон {args.ref}: DER не определён")

    table = run_sweep(stream, dim, reference, args.n_init, args.n_ckpt, args.centroid_threshold, args.collar)
    print(format_sweep(table, args.n_init, args.n_ckpt))
    return EXIT_OK
