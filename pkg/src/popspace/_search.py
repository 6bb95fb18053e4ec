"""Seeded derivative-free local search shared by the estimators."""

from __future__ import annotations

import numpy as np


def random_descent(objective, start, rng: np.random.Generator, iters: int, step: float = 0.1,
                   renormalize=None):
    """Minimize ``objective`` over a list of complex arrays by random perturbation.

    Each step perturbs every array by a complex Gaussian scaled to its own
    magnitude; improvements are kept and widen the step, failures shrink it.
    ``objective`` may return ``inf`` to reject a point. ``renormalize`` maps
    an accepted point to an equivalent one (e.g. balancing a scale symmetry).
    Returns ``(best_point, best_value, trace)`` where ``trace`` is the
    sequence of accepted values.
    """
    point = [np.array(a, dtype=np.complex128) for a in start]
    best = objective(point)
    trace = [best]
    for _ in range(iters):
        trial = []
        for a in point:
            mag = np.abs(a).max() if a.size else 0.0
            mag = mag if mag > 0 else 1.0
            noise = rng.standard_normal(a.shape) + 1j * rng.standard_normal(a.shape)
            trial.append(a + step * mag * noise)
        val = objective(trial)
        if val < best:
            point, best = trial, val
            if renormalize is not None:
                point = renormalize(point)
            trace.append(best)
            step = min(step * 1.5, 1.0)
        else:
            step = max(step * 0.7, 1e-8)
    return point, best, trace
