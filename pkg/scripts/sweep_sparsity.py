#!/usr/bin/env python3
"""Sweep sparse rates and print the MAC/time picture of the body convolutions.

A thin wrapper over `civsr bench` that also derives the break-even rate
(where gather/scatter overhead cancels the skipped MACs) from the samples.
"""

import argparse
import csv
import io
import sys
from contextlib import redirect_stdout

from civsr.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--channels", type=int, default=128)
    ap.add_argument("--blocks", type=int, default=7)
    ap.add_argument("--size", default="64x64")
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rates = [i / 10 for i in range(11)]
    buf = io.StringIO()
    with redirect_stdout(buf):
        rc = cli_main(
            [
                "bench",
                "--channels",
                str(args.channels),
                "--blocks",
                str(args.blocks),
                "--sizes",
                args.size,
                "--rates",
                ",".join(str(r) for r in rates),
                "--repeats",
                str(args.repeats),
                "--seed",
                str(args.seed),
            ]
        )
    if rc != 0:
        print(buf.getvalue(), file=sys.stderr)
        return rc

    rows = list(csv.DictReader(io.StringIO(buf.getvalue())))
    print(f"{'rate':>6} {'MACs kept':>10} {'best time ratio':>16}")
    break_even = None
    for rate in rates:
        sample = [r for r in rows if float(r["sparse_rate"]) == rate]
        ratio = min(float(r["time_ratio"]) for r in sample)
        kept = int(sample[0]["sparse_macs"]) / int(sample[0]["dense_macs"])
        marker = ""
        if ratio < 1.0 and break_even is None:
            break_even = rate
            marker = "  <- first win"
        print(f"{rate:>6.1f} {kept:>10.2%} {ratio:>16.3f}{marker}")
    if break_even is None:
        print("sparse path never beat dense at these settings")
    else:
        print(f"sparse execution wins from rate {break_even:.1f} on this machine")
    return 0


if __name__ == "__main__":
    sys.exit(main())
