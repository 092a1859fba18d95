#!/usr/bin/env python3
"""Desk-scale coarsening ensemble with predictor overlays.

Runs N seeds of the uncoupled equation, averages the free energy and the
measured spacing on the shared record grid, and writes the mean curve with
the Langer and eigenvalue predictions attached after the handshake time.
Output lands under <out>/ensemble/<name>/ as CSV.
"""

import argparse
import sys
import time

from bchsim.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--t-final", type=float, default=100.0)
    ap.add_argument("--n", type=int, default=2048)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="out")
    ap.add_argument("--name", default=None)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    cfg_lines = [
        "coupling = uncoupled",
        f"n = {args.n}",
        "kappa = 1e-3",
        f"t_final = {args.t_final}",
        "dt = 1e-3",
        "record_every = 100",
        f"seed = {args.seed}",
    ]
    cfg_path = f"/tmp/coarsening_ensemble_{args.seed}.cfg"
    with open(cfg_path, "w") as fh:
        fh.write("\n".join(cfg_lines) + "\n")

    argv = ["ensemble", "--config", cfg_path, "--trials", str(args.trials),
            "--out", args.out, "--threads", str(args.threads)]
    if args.name:
        argv += ["--name", args.name]
    start = time.perf_counter()
    code = cli_main(argv)
    print(f"total {time.perf_counter() - start:.1f}s, exit {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
