from typing import Dict, List, Sequence
import argparse
import logging

from diar.handlers.common import EXIT_OK, UsageError, audio_duration, build_config, mean_std
from diar.models.core import TimedEmbedding
from diar.services.diarizer import diarize_stream, online_step_times
from diar.services.stream_io import load_embeddings
from diar.utils.config import CENTROID_THRESHOLD, N_INIT

logger = logging.getLogger(__name__)

DEFAULT_N_CKPT = [60, 120, 180, 240, 300]


def register(subparsers) -> None:
    parser = subparsers.add_parser("bench", help="RTF и задержка для разных N_ckpt")
    parser.add_argument("--embeddings", required=True, help="файл потока SDEB1")
    parser.add_argument("--n-ckpt", type=int, nargs="+", default=DEFAULT_N_CKPT,
                        help="значения N_ckpt (по умолчанию 60 120 180 240 300)")
    parser.add_argument("--repeats", type=int, default=10, help="повторов на каждое значение (по умолчанию 10)")
    parser.add_argument("--n-init", type=int, default=None,
                        help=f"порог фазы накопления (по умолчанию min({N_INIT}, наименьший N_ckpt))")
    parser.set_defaults(handler=handle_bench)


def run_bench(stream: Sequence[TimedEmbedding], dim: int, n_ckpt_values: Sequence[int],
              repeats: int, n_init: int) -> List[Dict[str, float]]:
    """Для каждого N_ckpt - repeats прогонов; RTF = время обработки / длительность аудио"""
    duration = audio_duration(stream)
    rows = []
    for n_ckpt in n_ckpt_values:
        config = build_config(n_init, n_ckpt, CENTROID_THRESHOLD, dim)
        rtfs, latencies = [], []
        for _ in range(repeats):
            diarizer = diarize_stream(stream, config)
            rtfs.append(sum(diarizer.step_times) / duration)
            latencies.append(mean_std(online_step_times(diarizer))[0] * 1000.0)
        rtf_mean, rtf_std = mean_std(rtfs)
        latency_ms, _ = mean_std(latencies)
        rows.append({"n_ckpt": n_ckpt, "rtf_mean": rtf_mean, "rtf_std": rtf_std, "latency_ms": latency_ms})
        logger.info(f"N_ckpt={n_ckpt}: RTF {rtf_mean:.5f} ± {rtf_std:.5f}, задержка {latency_ms:.2f} мс")
    return rows


def format_bench(rows: Sequence[Dict[str, float]]) -> str:
    lines = [f"{'N_ckpt':>6}  {'RTF':>22}  {'latency, ms':>11}"]
    for row in rows:
        rtf = f"{row['rtf_mean']:.5f} ± {row['rtf_std']:.5f}"
        lines.append(f"{row['n_ckpt']:>6}  {rtf:>22}  {row['latency_ms']:>11.2f}")
    lines.append("")
    for row in rows:
        lines.append(
            f"n_ckpt={row['n_ckpt']} rtf_mean={row['rtf_mean']:.5f} "
            f"rtf_std={row['rtf_std']:.5f} latency_ms={row['latency_ms']:.2f}"
        )
    return "\n".join(lines)


def handle_bench(args: argparse.Namespace) -> int:
    """Обрабатывает команду bench"""
    if args.repeats < 1:
        raise UsageError(f"--repeats должен быть >= 1, получено {args.repeats}")
    n_init = args.n_init if args.n_init is not None else min(N_INIT, min(args.n_ckpt))

    dim, stream = load_embeddings(args.embeddings)
    duration = audio_duration(stream)
    if duration <= 0:
        raise ValueError(f"Поток {args.embeddings} пуст: RTF не определён")

    rows = run_bench(stream, dim, args.n_ckpt, args.repeats, n_init)
    print(format_bench(rows))
    return EXIT_OK
