"""make-figure <id> <input-dir> <out-dir>  (id in 2..8 or C, or 'all')."""
import argparse
import sys

from . import data, figures


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="make-figure", description=__doc__)
    ap.add_argument("figure_id",
                    help=f"one of {', '.join(figures.FIGURE_IDS)}, or 'all'")
    ap.add_argument("input_dir")
    ap.add_argument("out_dir")
    args = ap.parse_args(argv)

    ids = (figures.FIGURE_IDS if args.figure_id == "all"
           else [args.figure_id])
    status = 0
    for fid in ids:
        try:
            spec = figures.build_spec(fid, args.input_dir)
            out = figures.render(spec, args.out_dir)
            print(out)
        except data.DataError as exc:
            print(f"figure {fid}: {exc}", file=sys.stderr)
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
