#!/usr/bin/env python3
"""Writes the bundled run configs into configs/."""
import cmath
import json
import math
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "configs"


def pt(z):
    return [round(z.real, 15), round(z.imag, 15)]


def segment(a, b, n=16):
    return [pt(a + (b - a) * k / n) for k in range(n + 1)]


def spiral(r0, r1, t0, t1, n=32):
    return [pt(cmath.rect(r0 + (r1 - r0) * k / n, t0 + (t1 - t0) * k / n)) for k in range(n + 1)]


def base(name, num, period, near, root, curves, bounds, nx, ny, regions, census, iterate=1):
    return {
        "name": name,
        "map": {"numerator": [pt(c) for c in num], "denominator": [[1.0, 0.0]], "iterate": iterate},
        "basin": {"period": period, "near": pt(near)},
        "tree": {"root": pt(root), "base_curves": curves, "depth": 10, "mode": "full",
                 "max_step": 0.01, "postcritical_K": 64, "postcritical_margin": 1e-6},
        "weights": [0.5, 0.5],
        "harvest": {"trials": 200, "M_min": 3, "N_max": 12, "radii": [0.3, 0.15, 0.075],
                    "tail_tol": 1e-6, "anchor_retries": 5, "rotations": True},
        "raster": {"bounds": bounds, "nx": nx, "ny": ny, "max_iters": 500},
        "census": {"max_period": census},
        "diagnostics": {"regions": [{"center": pt(c), "radius": r} for c, r in regions],
                        "volume_n_max": 12, "volume_samples": 100000},
        "overlay": {"scale": 1, "tree_depth": 6},
        "seed": 1,
        "output": f"out/{name}",
    }


def main():
    OUT.mkdir(exist_ok=True)
    s = math.sqrt(0.5)
    z2 = base("z2", [0, 0, 1], 1, 0, 0.5,
              [segment(0.5, s), spiral(0.5, s, 0.0, math.pi)],
              [-1.5, 1.5, -1.5, 1.5], 512, 512, [(0.5, 0.1)], 8)

    # Tree for g = f^2 inside the component of 0; preimages of the root there.
    r0 = -0.2
    p = math.sqrt(1 - math.sqrt(1 + r0))
    bas = base("basilica", [-1, 0, 1], 2, 0, r0,
               [segment(r0, -p), spiral(-r0, p, math.pi, 0.0)],
               [-1.8, 1.8, -1.2, 1.2], 512, 340, [(0.4, 0.1)], 8, iterate=2)

    # Curves stay off the postcritical segment [0, 1/2].
    root = 0.3j
    q = cmath.sqrt(-0.25 + 0.3j)
    cf = base("cauliflower", [0.25, 0, 1], 1, 0.5, root,
              [segment(root, q), segment(root, -0.3)[:-1] + segment(-0.3, -q)],
              [-1.0, 1.0, -1.2, 1.2], 400, 480, [(0.0, 0.1)], 6)

    for cfg in (z2, bas, cf):
        (OUT / f"{cfg['name']}.json").write_text(json.dumps(cfg, indent=2) + "\n")


if __name__ == "__main__":
    main()
