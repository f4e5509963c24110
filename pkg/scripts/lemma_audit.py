#!/usr/bin/env python3
"""Run every lemma checker over the alpha-calibrated instance family and tabulate outcomes."""
import argparse
import collections
import warnings

from spectral_transfer.errors import DegenerateCutWarning
from spectral_transfer.generators import alpha_family
from spectral_transfer.metrics import assumption_report
from spectral_transfer.oracles import LEMMA_IDS, check_all
from spectral_transfer.spectral import minimize_loss


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--noise", type=float, default=0.2)
    ap.add_argument("-v", "--verbose", action="store_true", help="one line per instance")
    args = ap.parse_args()

    tally = {lid: collections.Counter() for lid in LEMMA_IDS}
    worst = {}
    for i, inst in enumerate(alpha_family(args.count, noise=args.noise)):
        g, d = inst.graph, inst.domain_spec
        stats = assumption_report(g, d, k=d.m)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateCutWarning)
            rep = minimize_loss(g, d.m)
        reports = check_all(g, d, rep)
        for r in reports:
            tally[r.lemma_id][r.status] += 1
            if r.worst_margin is not None:
                worst[r.lemma_id] = min(worst.get(r.lemma_id, float("inf")), r.worst_margin)
        if args.verbose:
            flags = " ".join(f"{k[-1]}={'Y' if v['holds'] else 'n' if v['holds'] is False else '-'}"
                             for k, v in stats.verdicts.items())
            print(f"{i:3d} n={g.n:3d} r={d.r} alpha={stats.alpha:.4f} gamma={stats.gamma_lower:.3f} {flags}")

    print(f"{'lemma':20s} {'holds':>6s} {'violated':>9s} {'n/a':>5s} {'worst margin':>14s}")
    for lid in LEMMA_IDS:
        c = tally[lid]
        w = worst.get(lid)
        print(f"{lid:20s} {c['holds']:6d} {c['violated']:9d} {c['not_applicable']:5d} "
              f"{'' if w is None else f'{w:14.3e}'}")


if __name__ == "__main__":
    main()
