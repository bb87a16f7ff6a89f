"""R-convexity verdicts for a gallery of masks over a sweep of radii.

Writes a JSON table (mask, R, status, witness) to stdout or ``--output``.
"""
from __future__ import annotations

import argparse
import json
from dataclasses import dataclass

from sphermean import phantoms as ph
from sphermean.geometry import r_convex
from sphermean.suites import hexagon_mask


@dataclass
class GalleryConfig:
    shape: int = 256
    spacing: float = 0.02
    radii: tuple = (0.1, 0.2, 0.4, 0.6, 0.8, 1.2)


def masks(cfg):
    n, h = cfg.shape, cfg.spacing
    return {
        "disk": ph.disk_mask(2, n, h, 1.0),
        "square": ph.square_mask(2, n, h, 0.8),
        "hexagon": hexagon_mask(n, h),
        "lshape_fillet_0.6": ph.lshape_mask(n, h, 1.0, 0.6),
        "lshape_fillet_0.2": ph.lshape_mask(n, h, 1.0, 0.2),
        "two_disks_gap_2.3": ph.two_disk_mask(n, h, 1.0, 2.3),
    }


def run(cfg):
    rows = []
    for name, K in masks(cfg).items():
        for R in cfg.radii:
            if not K.is_bounded():
                continue
            v = r_convex(K, R)
            rows.append({"mask": name, "R": R, "status": v.status,
                         "components": v.component_count, "witness": list(v.witness_point)})
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--output")
    a = ap.parse_args()
    text = json.dumps(run(GalleryConfig()), indent=2, sort_keys=True)
    if a.output:
        open(a.output, "w").write(text + "\n")
    else:
        print(text)
