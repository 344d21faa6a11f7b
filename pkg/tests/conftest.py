"""Shared helpers for the test suite."""

import numpy as np

from nlcompete.grid import Field, build_grid
from nlcompete.kernels import KernelSpec, assemble


def random_spectral_draw(rng):
    """One random (operator, potential) pair at desk scale (n <= 64)."""
    n = int(rng.integers(24, 65))
    g = build_grid(0, 1, n)
    family = rng.choice(["gaussian", "tent", "nonsymmetric-shifted-gaussian"])
    scale = rng.uniform(0.15, 0.5)
    drift = rng.uniform(-0.15, 0.15) if family == "nonsymmetric-shifted-gaussian" else 0.0
    op = assemble(KernelSpec(family, scale, drift), g, rng.choice(["D", "N"]),
                  rng.uniform(0.3, 1.2))
    coef = rng.uniform(-1, 1, 3)
    ph = rng.uniform(0, 2 * np.pi, 2)
    gamma = Field.from_function(
        g,
        lambda x: coef[0] + coef[1] * np.sin(2 * np.pi * x + ph[0])
        + coef[2] * np.cos(4 * np.pi * x + ph[1]),
    )
    return op, gamma


def dense_rightmost(op, gamma):
    """Brute-force oracle: rightmost eigenvalue real part of the dense matrix."""
    A = op.matrix + np.diag(gamma.values)
    return float(np.max(np.linalg.eigvals(A).real))
