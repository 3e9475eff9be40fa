import argparse
import sys

from .render import FigureSpec, FigvizError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figviz",
        description="Grouped truth/baseline/corrected bars from an experiment results CSV.",
    )
    parser.add_argument("--csv", required=True, help="results CSV (experiments schema)")
    parser.add_argument("--experiment", default=None, help="keep rows with this experiment name")
    parser.add_argument("--scheme", default=None, choices=("mpe", "bpe"))
    parser.add_argument("--model", default=None, choices=("exact", "counts"))
    parser.add_argument("--char", default=None, help="character whose conditional is plotted (default: smallest present)")
    parser.add_argument("--out", required=True, help="image path; .png and .svg supported")
    return parser


def main(argv: list[str] | None = None) -> None:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        csv_path=args.csv,
        out_path=args.out,
        experiment=args.experiment,
        scheme=args.scheme,
        model=args.model,
        char=args.char,
    )
    try:
        image, sidecar = render(spec)
    except FigvizError as e:
        print(f"figviz: {e}", file=sys.stderr)
        sys.exit(1)
    print(f"wrote {image} and {sidecar}")


if __name__ == "__main__":
    main()
