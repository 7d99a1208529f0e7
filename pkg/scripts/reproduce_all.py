"""Run every benchmark experiment and collect the CSVs under one directory.

    python3 scripts/reproduce_all.py --out results
"""

import argparse
import sys
import warnings
from pathlib import Path

from fourier_edges.cli import main
from fourier_edges.frames import RankDeficiencyWarning

RUNS = [
    ("table1", ["table1", "--trials", "5"]),
    ("noisy_002", ["noisy", "--noise-std", "0.02", "--seeds", "10"]),
    ("noisy_008", ["noisy", "--noise-std", "0.08", "--seeds", "10"]),
    ("threshold", ["sweep-threshold", "--function", "f1", "--pattern", "logarithmic", "--noise-std", "0.02"]),
    ("resolution", ["sweep-resolution", "--function", "f3", "--pattern", "jittered", "--noise-std", "0.02",
                    "--trials", "5", "--J-values", "16,32,64,128"]),
    ("clean_f1", ["detect", "--function", "f1"]),
]


def run(out: Path, only=None) -> int:
    worst = 0
    for name, argv in RUNS:
        if only and name not in only:
            continue
        print(f"== {name}", flush=True)
        code = main(argv + ["--out", str(out / name)])
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--only", nargs="*", help="subset of: " + " ".join(n for n, _ in RUNS))
    a = ap.parse_args()
    warnings.simplefilter("ignore", RankDeficiencyWarning)
    sys.exit(run(a.out, a.only))
