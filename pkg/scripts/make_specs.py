#!/usr/bin/env python3
"""Regenerate the shipped problem specs in specs/ (seed 42)."""

import argparse
from pathlib import Path

import numpy as np

from akkt.families import infeasible_1d_spec, qp_2d_spec
from akkt.io import write_json


def specs(seed: int) -> dict:
    rng = np.random.default_rng(seed)
    n = 100
    M = rng.standard_normal((n, n))
    H = M @ M.T / n + np.eye(n)
    A = rng.standard_normal((5, n))
    x_feas = rng.uniform(-0.5, 0.5, n)
    A7 = rng.standard_normal((4, 7))
    return {
        "qp2d": qp_2d_spec(),
        "infeasible1d": infeasible_1d_spec(),
        "qp_box_100": {"name": "qp_box_100", "family": "qp-box", "seed": seed,
                       "params": {"H": H.tolist(), "c": rng.standard_normal(n).tolist(),
                                  "lower": -1.0, "upper": 1.0, "A": A.tolist(),
                                  "b": (A @ x_feas).tolist(), "cone": "zero"},
                       "solver": {"inner_tol_rate": 0.1}},
        "affine": {"name": "affine", "family": "affine-equality", "seed": seed,
                   "params": {"A": A7.tolist(), "b": rng.standard_normal(4).tolist()}},
        "nonlinear_sphere": {"name": "nonlinear_sphere", "family": "nonlinear-equality",
                             "seed": seed, "params": {"n": 3}},
        "l2_box_control_4096": {"name": "l2_box_control_4096", "family": "l2-box-control",
                                "seed": seed,
                                "params": {"n": 4096, "grading": 1.0, "alpha": 1e-2,
                                           "amplitude": 3.0, "ua": -1.0, "ub": 1.0},
                                "solver": {"inner_tol_rate": 0.1}},
        "example35": {"name": "example35", "family": "example35", "seed": seed,
                      "params": {"n": 4096, "grading": 4.0},
                      "solver": {"max_outer": 12}},
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "specs"))
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, spec in specs(args.seed).items():
        write_json(spec, out / f"{name}.json")
        print(out / f"{name}.json")


if __name__ == "__main__":
    main()
