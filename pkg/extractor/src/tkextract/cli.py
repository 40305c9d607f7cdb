"""Command-line front end.

One command, one job::

    tkextract --model bert-base-uncased --layer -1 \
        --in documents.txt --out corpus.tkc

The input file holds one pre-tokenized document per line, words separated by
whitespace.  Exit codes: 0 success, 1 input/output failure, 2 unusable
parameters or model, 3 data that cannot be represented (a word longer than a
whole block).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from tkextract.errors import ExtractorConfigError, ExtractorDataError
from tkextract.extract import ExtractorConfig, run_extraction


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tkextract",
        description=(
            "Extract per-subtoken transformer hidden states from pre-tokenized "
            "text into a binary vector corpus with vocabulary and metadata "
            "sidecars."
        ),
    )
    parser.add_argument(
        "--model",
        required=True,
        help="transformer model name or local path",
    )
    parser.add_argument(
        "--layer",
        type=int,
        default=-1,
        help="hidden layer counted from the end: -1, -2, or -3 (default: -1)",
    )
    parser.add_argument(
        "--in",
        dest="in_path",
        required=True,
        help="input text file, one whitespace-tokenized document per line",
    )
    parser.add_argument(
        "--out",
        required=True,
        help="output corpus file (sidecars are written next to it)",
    )
    parser.add_argument(
        "--max-block-len",
        type=int,
        default=None,
        help=(
            "maximum subtokens per encoder block, excluding special tokens "
            "(default: the model's position budget)"
        ),
    )
    parser.add_argument(
        "--batch-size",
        type=int,
        default=8,
        help="blocks per model forward pass (default: 8)",
    )
    return parser


def _read_documents(path: Path) -> list[list[str]]:
    # Undecodable bytes surface as lone surrogates, which cleanup strips.
    with open(path, encoding="utf-8", errors="surrogateescape") as fh:
        return [line.split() for line in fh]


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    config = ExtractorConfig(
        model=args.model,
        layer_index=args.layer,
        max_block_subtokens=args.max_block_len,
        batch_size=args.batch_size,
    )
    try:
        documents = _read_documents(Path(args.in_path))
        report = run_extraction(documents, config, args.out)
    except ExtractorConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ExtractorDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"{report.subword_rows} rows ({report.words} words, "
        f"{report.documents} documents, dim {report.dim}) -> {args.out}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
