"""plasmaplot: render figures from exported run bundles.

    plasmaplot decay      --in DIR --out FILE.png
    plasmaplot scattering --in DIR --out FILE.png
    plasmaplot shock      --in EULER_DIR --in FIELD_DIR --out FILE.png

DIR is a plotdata directory written by `plasmawave export-plotdata`.
"""

from __future__ import annotations

import argparse
import sys

from .bundle import SchemaError, load_bundle
from .figures import plot_decay, plot_scattering, plot_shock_compare


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="plasmaplot")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("decay", "scattering", "shock"):
        sp = sub.add_parser(name)
        sp.add_argument("--in", dest="inputs", action="append", required=True,
                        help="plot bundle directory (twice for shock)")
        sp.add_argument("--out", required=True, help="output image path")
    args = p.parse_args(argv)
    try:
        if args.command == "shock":
            if len(args.inputs) != 2:
                print("shock needs two --in bundles (field off, field on)",
                      file=sys.stderr)
                return 2
            out = plot_shock_compare(load_bundle(args.inputs[0]),
                                     load_bundle(args.inputs[1]), args.out)
        elif args.command == "decay":
            out, _ = plot_decay(load_bundle(args.inputs[0]), args.out)
        else:
            out, _ = plot_scattering(load_bundle(args.inputs[0]), args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    print(f"figure -> {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
