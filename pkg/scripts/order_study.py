"""Grid refinement against the stationary solution at t = T.

Usage: python scripts/order_study.py [levels] [out_dir]

Starts from (M, N) = (50, 50) and halves dx with dt tied to dx^2. The
coarser (25, 13) rung of the default CLI ladder violates the stability
bound, so it is left out here; ``bubblefd validate --order --allow-unstable
--lcp brennan-schwartz`` runs it.
"""

import logging
import sys
from pathlib import Path

from bubblefd import BubbleProblem, order_study
from bubblefd.validation import refinement_ladder, write_order_csv


def main(levels="3", out="out/order"):
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    study = order_study(BubbleProblem.example(), refinement_ladder(50, 50, int(levels)))
    print(f"{'M':>5} {'N':>6} {'dx':>9} {'max error':>11} {'order':>6} {'K':>3}")
    for row in study.rows:
        print(f"{row.M:5d} {row.N:6d} {row.dx:9.5f} {row.max_error:11.3e} {row.observed_order:6.2f} "
              f"{row.outer_iterations:3d}")
    write_order_csv(out / "order.csv", study)


if __name__ == "__main__":
    main(*sys.argv[1:])
