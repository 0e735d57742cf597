"""plot-nsf: render figures from simulator output files.

    plot-nsf energies    --in diagnostics.csv --out energies.png
    plot-nsf weakstrong  --in amp0.json amp1.json amp2.json --out ladder.png
    plot-nsf convergence --in summary.json --out orders.png
"""

from __future__ import annotations

import argparse
import sys

from .figures import plot_convergence, plot_energies, plot_weakstrong_ladder
from .reader import SchemaError

__all__ = ["main"]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plot-nsf", description=__doc__)
    parser.add_argument("kind",
                        choices=["energies", "weakstrong", "convergence"])
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input CSV / summary JSON file(s)")
    parser.add_argument("--out", required=True, help="output figure file")
    args = parser.parse_args(argv)

    try:
        if args.kind == "energies":
            if len(args.inputs) != 1:
                parser.error("energies takes exactly one CSV file")
            out = plot_energies(args.inputs[0], args.out)
        elif args.kind == "weakstrong":
            out, slope = plot_weakstrong_ladder(args.inputs, args.out)
            print(f"fitted slope: {slope:.6f}")
        else:
            out = plot_convergence(args.inputs, args.out)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
