"""figures CLI: render one spec file, or everything a manifest declares."""

import argparse
import sys

from .render import load_spec, render, render_all


def build_parser():
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render figures from run manifests (PNG and SVG).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    one = sub.add_parser("render", help="render a single figure spec (JSON)")
    one.add_argument("--spec", required=True)
    one.set_defaults(func=lambda a: render(load_spec(a.spec)))

    everything = sub.add_parser("all", help="render a manifest's figure set")
    everything.add_argument("--manifest", required=True)
    everything.add_argument("--out", default=None)
    everything.set_defaults(func=lambda a: render_all(a.manifest, a.out))

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        written = args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
