"""Regenerate the bundled synthetic network trace.

Five hosts ("laptops"), 3000 four-second windows each, written as
pre-binned ``arm_id,count`` rows. Each window is idle with some probability,
otherwise it carries a rounded Pareto burst. Hosts differ in burst rate and
tail index, so one host has a clearly heavier tail than the rest while a
different host has the largest mean count.
"""

import argparse
from pathlib import Path

import numpy as np

HOSTS = [
    # label, active probability, tail index, scale
    ("laptop_0", 0.90, 3.0, 4.0),
    ("laptop_1", 0.30, 1.3, 2.0),
    ("laptop_2", 0.80, 2.5, 3.0),
    ("laptop_3", 0.60, 2.0, 2.0),
    ("laptop_4", 0.95, 4.0, 6.0),
]
WINDOWS = 3000


def main() -> None:
    here = Path(__file__).resolve().parent.parent
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=here / "src" / "extreme_bandits" / "data" / "synthetic_trace.csv")
    ap.add_argument("--seed", type=int, default=20140401)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("arm_id,count\n")
        for label, p_active, alpha, scale in HOSTS:
            active = rng.random(WINDOWS) < p_active
            burst = scale * rng.random(WINDOWS) ** (-1.0 / alpha)
            counts = np.where(active, np.floor(burst), 0).astype(np.int64)
            for c in counts:
                fh.write(f"{label},{c}\n")
    print(args.out)


if __name__ == "__main__":
    main()
