"""L^p annulus tails of the counterexample field across exponents.

Prints one row per exponent with the tail values at each inner radius and
whether the sequence is decreasing.  The crossover sits near p = 2n/(n-1).
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass, field

import numpy as np

from sphermean.inversion import CounterexampleSpec, lp_annulus_tails, zalcman_field


@dataclass
class TailConfig:
    dim: int = 2
    zero_index: int = 2
    shape: int = 512
    spacing: float = 0.04
    exponents: tuple = (3.0, 3.5, 3.8, 4.0, 4.2, 4.5, 5.0, 6.0)
    t0: list = field(default_factory=lambda: [2.0, 3.0, 4.0, 5.0])


def run(cfg):
    spec = CounterexampleSpec.from_zero_index(cfg.dim, cfg.zero_index)
    f = zalcman_field(spec, (cfg.shape,) * cfg.dim, cfg.spacing)
    print(f"lambda={spec.lam:.6f} critical p={spec.critical_p:g}")
    print("p      " + " ".join(f"t0={t:<8g}" for t in cfg.t0) + " trend")
    for p in cfg.exponents:
        tails = lp_annulus_tails(f, p, cfg.t0)
        trend = "decreasing" if np.all(np.diff(tails) < 0) else (
            "increasing" if np.all(np.diff(tails) > 0) else "mixed")
        print(f"{p:<6g} " + " ".join(f"{v:<11.4e}" for v in tails) + " " + trend)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--zero-index", type=int, default=2)
    ap.add_argument("--spacing", type=float, default=0.04)
    a = ap.parse_args()
    run(TailConfig(zero_index=a.zero_index, spacing=a.spacing))
