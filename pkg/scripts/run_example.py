"""Reference run: 50x50 grid on [-2, 2] x [0, 3], errors against q at several times.

Usage: python scripts/run_example.py [out_dir]
"""

import sys
import time
from pathlib import Path

from bubblefd import BubbleProblem, error_at_time, extract_contact_set, iterate, make_grid, write_field_csv
from bubblefd.validation import write_error_csv


def main(out="out/example"):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    problem = BubbleProblem.example()
    model = problem.stationary()
    start = time.perf_counter()
    rep = iterate(problem, make_grid(problem.a, problem.T, 50, 50))
    print(f"K = {rep.K} outer iterations in {time.perf_counter() - start:.2f}s, converged={rep.converged}")
    for k, (sup, low) in enumerate(zip(rep.sup_increments, rep.min_increments), 1):
        print(f"  k={k:2d}  sup increment {sup:.3e}  min increment {low:.1e}")
    write_field_csv(rep.final, out / "field.csv")
    for t in (0.5, 1.0, 3.0):
        err = error_at_time(rep.final, model.q, t)
        write_error_csv(out / f"error_t{t:g}.csv", err)
        print(f"t={err.time:g}: max error {err.max_error:.3e}, L2 error {err.l2_error:.3e}")
    last = extract_contact_set(rep.final, rep.obstacle(rep.K))[-1]
    print("contact set at T:", ", ".join(f"[{iv.x_left:g}, {iv.x_right:g}]" for iv in last),
          f"(k* = {model.k_star:.6f})")


if __name__ == "__main__":
    main(*sys.argv[1:])
