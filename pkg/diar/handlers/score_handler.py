import argparse
import logging

from diar.handlers.common import EXIT_OK, UsageError
from diar.services.rttm import read_rttm
from diar.services.scoring import der, jer

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("score", help="DER/JER гипотезы относительно эталона")
    parser.add_argument("--ref", required=True, help="эталонный RTTM")
    parser.add_argument("--hyp", required=True, help="RTTM гипотезы")
    parser.add_argument("--collar", type=float, default=0.0,
                        help="коллар в секундах, ±collar/2 у границ эталона (по умолчанию 0)")
    parser.set_defaults(handler=handle_score)


def format_report(breakdown, jer_value: float) -> str:
    """Таблица в процентах и те же значения в виде key=value"""
    values = {
        "der": breakdown.der * 100.0,
        "fa": breakdown.fa * 100.0,
        "ms": breakdown.ms * 100.0,
        "sc": breakdown.sc * 100.0,
        "jer": jer_value * 100.0,
    }
    formatted = {key: f"{value:.2f}" for key, value in values.items()}
    lines = [
        "  ".join(f"{key.upper():>7}" for key in formatted),
        "  ".join(f"{text:>7}" for text in formatted.values()),
        "",
    ]
    lines.extend(f"{key}={text}" for key, text in formatted.items())
    lines.append(f"scored={breakdown.scored_time:.3f}")
    return "\n".join(lines)


def handle_score(args: argparse.Namespace) -> int:
    """Обрабатывает команду score"""
    if args.collar < 0:
        raise UsageError(f"Коллар должен быть неотрицательным, получено {args.collar}")
    reference = read_rttm(args.ref)
    hypothesis = read_rttm(args.hyp)

    breakdown = der(reference, hypothesis, collar=args.collar)
    jer_value = jer(reference, hypothesis)
    print(format_report(breakdown, jer_value))
    logger.info(f"✅ DER {breakdown.der * 100:.2f}% (коллар {args.collar} с)")
    return EXIT_OK
