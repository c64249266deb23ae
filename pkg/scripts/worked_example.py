"""Gauge generators of the ten-dimensional driftless system, printed order by order."""

import argparse
import json
import time
from dataclasses import dataclass

from gaugenf.gauge import gauge_distribution, verify_symmetry
from gaugenf.models import driftless_ten
from gaugenf.stabilization import stabilize


@dataclass
class Config:
    show_fields: bool = False


def run(cfg):
    t0 = time.perf_counter()
    c = stabilize(driftless_ten())
    g = gauge_distribution(c)
    print(f"growth {g.growth}  indices {g.indices}  ({time.perf_counter() - t0:.1f} s)")
    for gen in g.generators:
        s = gen.summary()
        print(f"\n{gen.param}: order {gen.order}, verified {bool(verify_symmetry(gen, c))}")
        print("  delta_lam:", json.dumps(s["delta_lam"]))
        if cfg.show_fields:
            print("  delta_x:", json.dumps(s["delta_x"], indent=2))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--show-fields", action="store_true", help="also print the delta_x coefficient fields")
    run(Config(**vars(ap.parse_args())))
