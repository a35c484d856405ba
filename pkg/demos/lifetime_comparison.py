"""Process-fidelity decay of the stored qubit with and without parity recovery.

Prints fitted lifetimes for free Fock {0,1} storage, free T4C storage and
T4C under ideal recovery, and writes the curves to lifetime_comparison.csv.
"""

import numpy as np

from prespa.experiments.lifetime import lifetime_experiment


def main():
    t = np.linspace(0, 2000, 21)
    runs = {
        "free-fock": lifetime_experiment("free-fock", t),
        "free-t4c": lifetime_experiment("free", np.linspace(0, 400, 21), dim=12),
        "ideal-prespa": lifetime_experiment("ideal-prespa", t, dim=12),
    }
    for name, res in runs.items():
        print(f"{name:14s} tau_process = {res.tau():9.1f} us")
    print(f"improvement over free T4C: {runs['ideal-prespa'].tau() / runs['free-t4c'].tau():.1f}x")
    np.savetxt("lifetime_comparison.csv",
               np.column_stack([t, runs["free-fock"].process, runs["ideal-prespa"].process]),
               delimiter=",", header="time_us,F_free_fock,F_ideal_prespa", comments="")


if __name__ == "__main__":
    main()
