"""plotkit: render one figure kind from a diskwalk CSV."""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, FigureSpec, SchemaError, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="plotkit",
                                 description="figures from diskwalk CSV outputs")
    ap.add_argument("--in", dest="input_csv", required=True)
    ap.add_argument("--out", dest="out_path", required=True)
    ap.add_argument("--kind", required=True, choices=KINDS)
    ap.add_argument("--summary", default=None,
                    help="JSON summary sidecar (adds the predicted-slope "
                         "reference to sweep figures)")
    ap.add_argument("--deterministic", action="store_true")
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        info = render(FigureSpec(args.input_csv, args.kind, args.out_path,
                                 summary_json=args.summary,
                                 deterministic=args.deterministic))
    except (SchemaError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"wrote {info['out_path']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
