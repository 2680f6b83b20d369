"""Outer-iteration contraction rate as the grid is refined.

Usage: python scripts/contraction.py

Prints the iteration count needed for a sup increment below 1e-6 and the
asymptotic ratio of successive increments.
"""

from bubblefd import BubbleProblem, iterate, make_grid


def main():
    problem = BubbleProblem.example()
    print(f"{'M':>5} {'N':>5} {'K':>3} {'inc after 5':>12} {'rate':>7}")
    for M, N in [(40, 50), (50, 50), (100, 200), (200, 800)]:
        rep = iterate(problem, make_grid(problem.a, problem.T, M, N))
        inc = rep.sup_increments
        rate = inc[-1] / inc[-2]
        print(f"{M:5d} {N:5d} {rep.K:3d} {inc[4]:12.3e} {rate:7.4f}")


if __name__ == "__main__":
    main()
