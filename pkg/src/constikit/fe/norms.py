"""The two global convergence measures used by the nonlinear driver.

Residual-style: max residual force over the time-averaged spatial average of
force magnitudes. Solution-style: weighted RMS of the estimated solution
error, each component weighted by max(|U_i|, |mean(U)|).

Default tolerances are 5e-3 for the residual-style norm and 1e-3 for the
solution-style norm.
"""

from __future__ import annotations

import numpy as np

DEFAULT_TOL_ABAQUS = 5e-3
DEFAULT_TOL_COMSOL = 1e-3


def norm_abaqus_style(residual: np.ndarray, force_history) -> float:
    """r_max / q_tilde with q_tilde the mean of per-increment force averages.

    Falls back to the absolute max residual when the force scale is zero
    (nothing has been loaded yet).
    """
    residual = np.asarray(residual, dtype=float)
    history = np.asarray(list(force_history), dtype=float)
    if history.size == 0:
        raise ValueError("force history must be non-empty")
    r_max = float(np.max(np.abs(residual))) if residual.size else 0.0
    q = float(np.mean(history))
    if q == 0.0:
        return r_max
    return r_max / q


def spatial_force_average(internal_force: np.ndarray) -> float:
    """Spatial average of force magnitudes over the model."""
    internal_force = np.asarray(internal_force, dtype=float)
    if internal_force.size == 0:
        return 0.0
    return float(np.mean(np.abs(internal_force)))


def norm_comsol_style(error_estimate: np.ndarray, solution: np.ndarray) -> float:
    """Weighted Euclidean norm sqrt((1/N) sum (|E_i|/W_i)^2).

    The solution average S entering the weights is the mean solution
    magnitude. A signed mean would vanish for symmetric solution fields and
    leave near-zero degrees of freedom unguarded, making the norm
    unsatisfiable at machine-precision residuals.
    """
    e = np.asarray(error_estimate, dtype=float)
    u = np.asarray(solution, dtype=float)
    if e.shape != u.shape or e.ndim != 1 or e.size == 0:
        raise ValueError("error estimate and solution must be equal-length vectors")
    s = float(np.mean(np.abs(u)))
    w = np.maximum(np.abs(u), s)
    zero_w = w == 0.0
    if np.any(zero_w):
        if np.any(e[zero_w] != 0.0):
            return np.inf
        w = np.where(zero_w, 1.0, w)   # those terms contribute 0
    return float(np.sqrt(np.mean((np.abs(e) / w) ** 2)))
