"""Optimal-control preparation of the logical zero from the vacuum.

Runs ADAM-based pulse optimization on the (cavity, transmon) drift and saves
the pulse to grape_prep.csv (with grape_prep.csv.json metadata).
"""

from prespa.codes import EXPERIMENTAL
from prespa.grape import fidelity, optimize, prep_problem, save_pulse, zero_logical


def main():
    prob = prep_problem(zero_logical(EXPERIMENTAL, 10), (10, 3), duration_us=1.0, c1_threshold=0.01)

    def show(it, cost, F):
        if it % 25 == 0:
            print(f"iteration {it:4d}  cost {cost:.4f}  F {F:.4f}")

    pulse, hist = optimize(prob, seed=0, callback=show)
    F = fidelity(pulse, prob)
    print(f"final fidelity {F:.4f} after {len(hist.cost) - 1} iterations")
    save_pulse(pulse, "grape_prep.csv", {"fidelity": F, "seed": 0, "dims": [10, 3]})


if __name__ == "__main__":
    main()
