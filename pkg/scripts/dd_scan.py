"""Dynamical-decoupling study on the qubit-bath model.

Prints the robustness gain R_DD(t) / R_free(t) at a chosen time for pulse
rates k/pi, and optionally writes free and decoupled trajectories to CSV.

    python scripts/dd_scan.py --t 0.8 --kmax 8 --traj results/dd.csv
"""

import argparse
import math

from qmem import io
from qmem.dynamics import DEFAULT_DD_RATE, PulseSequence, evolve_channel, qubit_bath_model, trajectory
from qmem.robustness import eig_lower_bound


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--t", type=float, default=0.8)
    ap.add_argument("--kmax", type=int, default=8)
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--traj", default=None, help="CSV path for free and decoupled trajectories")
    args = ap.parse_args(argv)

    model = qubit_bath_model()
    free = eig_lower_bound(evolve_channel(model, None, args.t)).value
    print(f"R_free({args.t:g}) = {free:.6f}")
    print("rate      R_dd       ratio")
    for k in range(1, args.kmax + 1):
        r = eig_lower_bound(evolve_channel(model, PulseSequence(rate=k / math.pi), args.t)).value
        print(f"{k}/pi  {r:10.6f}  {r / free:9.4f}")

    if args.traj:
        rows = []
        for label, pulses in (("free", None), ("dd", PulseSequence(rate=DEFAULT_DD_RATE))):
            tr = trajectory(model, pulses, math.pi, args.steps, label=label)
            rows += io.trajectory_rows(tr, label)
            print(f"{label}: I(pi) = {tr.non_markovianity[-1]:.6f}")
        io.write_rows_csv(rows, io.TRAJECTORY_COLUMNS, args.traj)
        print(f"wrote {args.traj}")


if __name__ == "__main__":
    main()
