"""Write the data behind every reference figure as CSV files.

Usage: python3 scripts/reproduce_figures.py [output_dir] [--samples N]
"""

import argparse
from pathlib import Path

from noisetransport.cli import run
from noisetransport.experiments import FIGURES


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("output_dir", nargs="?", default="figures")
    parser.add_argument("--samples", type=int, default=1000, help="ensemble size for the ladder figure")
    args = parser.parse_args()
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for fig_id in sorted(FIGURES):
        path = out / f"fig{fig_id}.csv"
        code = run(["--output", str(path), "fig", "--id", str(fig_id), "--samples", str(args.samples)])
        print(f"fig {fig_id}: {'ok' if code == 0 else f'exit {code}'} -> {path}")


if __name__ == "__main__":
    main()
