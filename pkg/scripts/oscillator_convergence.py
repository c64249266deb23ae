"""RK4 error of the completed oscillator against cos t, over a range of step sizes."""

import argparse
from dataclasses import dataclass, field

import numpy as np

from gaugenf.models import oscillator
from gaugenf.oracle import ConstantSampler, constraint_drift_check, integrate, max_error
from gaugenf.stabilization import stabilize


@dataclass
class Config:
    horizon: float = 1.0
    steps: list = field(default_factory=lambda: [0.1, 0.05, 0.02, 1e-2, 5e-3, 1e-3])


def exact(t):
    return np.array([np.cos(t), -np.sin(t), -np.cos(t)])


def run(cfg):
    c = stabilize(oscillator())
    print(f"{len(c.stages)} stages, constraints {[str(t.as_expr()) for t in c.spec.constraints]}")
    prev = None
    for h in cfg.steps:
        tr = integrate(c.spec, ConstantSampler([]), [1.0, 0.0, -1.0], cfg.horizon, h)
        err = max_error(tr, exact)
        order = "" if prev is None else f"  observed order {np.log(prev[1] / err) / np.log(prev[0] / h):.2f}"
        print(f"h={h:<7g} max error {err:.3e}  surface drift {constraint_drift_check(tr):.1e}{order}")
        prev = (h, err)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--horizon", type=float, default=1.0)
    ap.add_argument("--steps", type=float, nargs="+", default=Config().steps)
    run(Config(**vars(ap.parse_args())))
