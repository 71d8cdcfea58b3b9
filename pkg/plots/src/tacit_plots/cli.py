"""Batch figure rendering:

    tacit-plots --in <results_dir> --kind <ccdf|ate_summary|misinfo_series> --out <file.png>
"""

from __future__ import annotations

import argparse
import logging
import sys

from .render import FIGURE_KINDS, PlotSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="tacit-plots", description=__doc__)
    parser.add_argument("--in", dest="input_dir", required=True, help="experiment output directory")
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    parser.add_argument("--out", dest="output", required=True, help="figure file to write (.png)")
    parser.add_argument("--linear-axes", action="store_true", help="disable log scaling on CCDF panels")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(name)s %(message)s")
    spec = PlotSpec(
        input_dir=args.input_dir,
        kind=args.kind,
        output_path=args.output,
        log_axes=not args.linear_axes,
    )
    try:
        path = render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
