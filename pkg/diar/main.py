import argparse
import logging
import sys
import os
from typing import List, Optional

# Добавляем корневую директорию в Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from diar.utils.config import LOG_LEVEL
from diar.handlers import bench_handler, diarize_handler, score_handler, simulate_handler, sweep_handler
from diar.handlers.common import EXIT_DATA, EXIT_USAGE, UsageError

logger = logging.getLogger(__name__)


class CliParser(argparse.ArgumentParser):
    """argparse с кодом выхода 1 для ошибок использования"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: ошибка: {message}\n")


def build_parser() -> CliParser:
    parser = CliParser(prog="diar", description="Онлайн-диаризация спикеров по потоку эмбеддингов")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for handler in (diarize_handler, score_handler, simulate_handler, bench_handler, sweep_handler):
        handler.register(subparsers)
    return parser


def setup_logging() -> None:
    # Настройка логирования
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Точка входа командной строки"""
    setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except UsageError as e:
        logger.error(f"Ошибка параметров: {e}")
        print(f"diar {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as e:
        logger.error(f"Ошибка данных: {e}")
        print(f"diar {args.command}: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
