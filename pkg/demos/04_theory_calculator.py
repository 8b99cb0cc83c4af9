"""Query-count calculator: how many oracle calls finding a near-optimal
weight costs, and when running several dataset copies in parallel pays off.

alpha is the probability mass the one-copy distribution puts on the
epsilon-optimal weights; beta is the fraction of weights that are
epsilon-optimal; C is the number of label classes. The closed-form optimal
copy count comes from a continuous relaxation, so this script also checks
it against exhaustive minimization of the discrete query count and prints a
case where the two disagree.
"""

import numpy as np

from grovertrain import amplify as am
from grovertrain import tasks
from grovertrain import theory as th


def query_table(alpha, beta, c, k_max=8):
    print(f"  {'k':>2} {'queries':>14}")
    for k in range(1, k_max + 1):
        q = th.queries_kpd(alpha, beta, c, k)
        print(f"  {k:>2} {q:>14.4f}")


def main():
    bundle = tasks.load_task("edge")
    table = am.accuracy_table(bundle.model, bundle.full)
    alpha, beta = th.alpha_beta(table, epsilon=0.0)
    c = 4.0  # two output bits -> four label classes
    print(f"edge task at epsilon=0: alpha={alpha:.6g}, beta={beta:.6g}, "
          f"C={c:g}")
    print(f"one-copy query count: {th.queries_1pd(alpha, c):.4f}")
    print("\nquery counts by copy count:")
    query_table(alpha, beta, c)

    holds = th.k_star_condition(alpha, beta, c)
    k_closed = th.optimal_k(alpha, beta, c)
    k_brute = th.brute_force_optimal_k(alpha, beta, c, 12)
    print(f"\noptimality condition holds: {holds}")
    print(f"closed-form optimal copy count: {k_closed}")
    print(f"exhaustive minimum over k<=12:  {k_brute}")
    if k_closed != k_brute:
        qc = th.queries_kpd(alpha, beta, c, k_closed)
        qb = th.queries_kpd(alpha, beta, c, k_brute)
        print(f"the closed form lands one step off the true discrete "
              f"minimum here: {qc:.2f} vs {qb:.2f} queries")

    print("\na cleaner regime (alpha=0.1, beta=0.01, C=4):")
    query_table(0.1, 0.01, 4.0, k_max=5)
    print(f"closed form {th.optimal_k(0.1, 0.01, 4.0)}, "
          f"exhaustive {th.brute_force_optimal_k(0.1, 0.01, 4.0, 12)}")

    rng = np.random.default_rng(5)
    a = 2.0 ** rng.uniform(-20, -0.1, 500)
    b = a * rng.uniform(0.01, 0.99, 500)
    cs = 2.0 ** rng.uniform(1, 10, 500)
    held = agree = 0
    for ai, bi, ci in zip(a, b, cs):
        if not th.k_star_condition(ai, bi, ci):
            continue
        held += 1
        ko = th.optimal_k(ai, bi, ci)
        agree += ko == th.brute_force_optimal_k(ai, bi, ci,
                                                max(3 * ko + 2, 12))
    print(f"\nrandom sweep: condition held on {held}/500 points, closed "
          f"form matched the exhaustive optimum on {agree} of those; the "
          f"rest are mostly one step off from flooring, plus a few shallow "
          f"minima where small k wins outright")


if __name__ == "__main__":
    main()
