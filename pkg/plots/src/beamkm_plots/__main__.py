import argparse
import sys

from .render import KINDS, PlotSpec, SchemaError, render


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="beamkm_plots", description="Render beamkm CSVs to figures")
    parser.add_argument("--csv", required=True, help="input CSV file")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--out", required=True, help="output image (.png/.svg)")
    parser.add_argument("--title", default="")
    args = parser.parse_args(argv)
    try:
        spec = PlotSpec(input_csv=args.csv, kind=args.kind, output=args.out,
                        title=args.title)
        render(spec)
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
