"""CLI: dpr-export export --input F --role context|question
   [--model ID] [--batch 32] --out F.phem"""

import argparse
import logging
import sys

from .export import ExportError, ExportJob, export_embeddings


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="dpr-export")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export", help="embed records into a PHEM file")
    p.add_argument("--input", required=True, help="passages/phrases/queries JSONL")
    p.add_argument("--role", required=True, choices=("context", "question"))
    p.add_argument("--model", help="model id or local path (default: published encoder)")
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--out", required=True, help="output PHEM path")

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = parser.parse_args(argv)
    try:
        job = ExportJob(
            input_path=args.input,
            role=args.role,
            model=args.model,
            batch_size=args.batch,
            output_path=args.out,
        )
        count, dim = export_embeddings(job)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {count} vectors of dim {dim} to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
