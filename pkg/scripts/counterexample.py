"""Exponential-Lagrangian model: two first-class-like constraints but a single gauge direction."""

import argparse
from dataclasses import dataclass

from gaugenf.gauge import gauge_distribution
from gaugenf.involutive import Observable, is_observable, observable_catalog
from gaugenf.models import dirac_counterexample
from gaugenf.oracle import SplineSampler, observable_causality_check
from gaugenf.stabilization import stabilize


@dataclass
class Config:
    seed: int = 3
    h: float = 1e-3


def run(cfg):
    spec, reg = dirac_counterexample()
    c = stabilize(spec, regularize=reg)
    g = gauge_distribution(c)
    print("tangential constraints:", [str(t.as_expr()) for t in c.tangential])
    print("gauge distribution:", [b.as_dict() for b in g.basis])
    print("observables found:", observable_catalog(c, g))
    smp = [SplineSampler(1, seed=cfg.seed), SplineSampler(1, seed=cfg.seed + 1)]
    x0 = [0.3, 0.2, 0.0, 0.0]
    for name in ("X", "Y"):
        O = Observable.parse(c.spec.reg, name)
        dev = observable_causality_check(O, c.spec, smp, x0, 1.0, cfg.h)
        print(f"{name}: observable {is_observable(O, c, g)}, spread across multiplier choices {dev:.2e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--h", type=float, default=1e-3)
    run(Config(**vars(ap.parse_args())))
