"""Command-line entry point.

Exit codes: 0 success, 2 bad input or parser failure, 3 parser model
unavailable (the message includes an install hint).
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .adapter import AdapterConfig, InputEncodingError, ModelUnavailable, convert_file


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ud-preprocess",
        description="Convert raw UTF-8 text to CoNLL-U with an external UD parser.",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    parser.add_argument("--lang", required=True, help="language code (de, es, he, pl, pt)")
    parser.add_argument("--in", dest="input", required=True, metavar="PATH",
                        help="raw UTF-8 text file")
    parser.add_argument("--out", dest="output", required=True, metavar="PATH",
                        help="CoNLL-U file to write")
    parser.add_argument("--model", default=None,
                        help="external parser command reading text on stdin and "
                             "writing CoNLL-U on stdout ({lang} expands); "
                             "default uses stanza")
    parser.add_argument("--batch-size", type=int, default=100,
                        help="input lines per parser call")
    parser.add_argument("--workers", type=int, default=1,
                        help="parallel parser calls; output stays in input order")
    parser.add_argument("--extra-langs", default="",
                        help="comma-separated extra language codes to allow")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = AdapterConfig(
            language=args.lang,
            model=args.model,
            batch_size=args.batch_size,
            workers=args.workers,
            input=args.input,
            output=args.output,
            extra_languages=tuple(
                code.strip() for code in args.extra_langs.split(",") if code.strip()
            ),
        )
        convert_file(config)
    except ModelUnavailable as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except (InputEncodingError, ValueError, OSError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
