#!/usr/bin/env python3
"""Run every figure preset and drop the CSV/manifest bundles in one place.

Desk profile by default (seconds-to-minutes per preset); pass --profile full
for publication-scale horizons and grids.
"""

import argparse
import sys

from adaptdyn import preset_config, run_experiment

FIGURE_PRESETS = (
    "landscape_x",
    "landscape_p",
    "fig3_ratio",
    "fig4_eps_sweep",
    "fig5_dsweep",
    "fig6_p_stable",
    "fig7_p_varying",
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/presets")
    parser.add_argument("--profile", choices=("desk", "full"), default="desk")
    parser.add_argument("--workers", type=int, default=2)
    args = parser.parse_args()

    for name in FIGURE_PRESETS:
        cfg = preset_config(name, args.profile,
                            out_dir=f"{args.out}/{name}",
                            workers=args.workers)
        manifest = run_experiment(cfg)
        print(f"{name}: {len(manifest['outputs'])} files, "
              f"{manifest['wall_time_s']:.1f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
