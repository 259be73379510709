from pathlib import Path
import argparse
import logging

from diar.handlers.common import EXIT_OK, UsageError
from diar.services.rttm import write_rttm
from diar.services.stream_io import write_stream
from diar.services.synthetic import SyntheticSpec, generate_synthetic
from diar.utils.config import WINDOW_LEN, WINDOW_SHIFT

logger = logging.getLogger(__name__)

# Флаг командной строки -> поле SyntheticSpec
FLAG_FIELDS = {
    "speakers": "n_speakers",
    "duration": "duration",
    "seed": "seed",
    "noise": "noise_sigma",
    "dim": "dim",
    "turn_mean": "turn_mean",
    "sim_gap": "min_speaker_sim_gap",
}


def register(subparsers) -> None:
    parser = subparsers.add_parser("simulate", help="синтетический поток эмбеддингов и эталонный RTTM")
    parser.add_argument("--config", default=None, help="файл key=value с параметрами SyntheticSpec")
    parser.add_argument("--speakers", type=int, default=None, help="число спикеров (по умолчанию 3)")
    parser.add_argument("--duration", type=float, default=None, help="длительность, с (по умолчанию 600)")
    parser.add_argument("--seed", type=int, default=None, help="зерно генератора (по умолчанию 0)")
    parser.add_argument("--noise", type=float, default=None, help="σ гауссова шума (по умолчанию 0.05)")
    parser.add_argument("--dim", type=int, default=None, help="размерность эмбеддингов (по умолчанию 256)")
    parser.add_argument("--turn-mean", type=float, default=None, help="средняя длина реплики, с (по умолчанию 8)")
    parser.add_argument("--sim-gap", type=float, default=None,
                        help="максимальный косинус между направлениями спикеров (по умолчанию 0.3)")
    parser.add_argument("--out-embeddings", required=True, help="куда записать поток SDEB1")
    parser.add_argument("--out-ref", required=True, help="куда записать эталонный RTTM")
    parser.set_defaults(handler=handle_simulate)


def build_spec(args: argparse.Namespace) -> SyntheticSpec:
    """Параметры из файла конфигурации, поверх них - явно заданные флаги"""
    try:
        values = {"n_speakers": 3, "duration": 600.0, "window_len": WINDOW_LEN, "window_shift": WINDOW_SHIFT}
        if args.config:
            if not Path(args.config).is_file():
                raise UsageError(f"Файл параметров не найден: {args.config}")
            values.update(SyntheticSpec.read_config_values(args.config))
        values.update({
            field: getattr(args, flag)
            for flag, field in FLAG_FIELDS.items()
            if getattr(args, flag) is not None
        })
        return SyntheticSpec(**values)
    except (TypeError, ValueError) as e:
        raise UsageError(str(e)) from e


def handle_simulate(args: argparse.Namespace) -> int:
    """Обрабатывает команду simulate"""
    spec = build_spec(args)
    records, reference = generate_synthetic(spec)
    write_stream(args.out_embeddings, records)
    write_rttm(args.out_ref, reference)
    return EXIT_OK
