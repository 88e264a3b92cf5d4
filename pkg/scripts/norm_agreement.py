"""Compare ||f|| in the truncated Fock and backward models as the depth grows."""

import argparse

from ckdilate.family import build_fock, build_rho_infty
from ckdilate.graph import Graph
from ckdilate.linalg import opnorm
from ckdilate.serialize import load_graph
from ckdilate.staralg import evaluate, parse_element


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--graph", help="graph JSON (default: one vertex with a loop)")
    ap.add_argument("--expr", default="p(v) + s(e)")
    ap.add_argument("--depths", default="4,8,16,32,64")
    args = ap.parse_args(argv)
    g = load_graph(args.graph) if args.graph else Graph(["v"], [("e", "v", "v")])
    f = parse_element(args.expr, g)
    print(f"{'N':>4} {'fock':>12} {'backward':>12} {'gap':>10}")
    for n in (int(x) for x in args.depths.split(",")):
        a = opnorm(evaluate(f, build_fock(g, n)))
        b = opnorm(evaluate(f, build_rho_infty(g, depth=n)))
        print(f"{n:>4} {a:12.8f} {b:12.8f} {abs(a - b):10.2e}")


if __name__ == "__main__":
    main()
