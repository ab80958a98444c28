"""Independent reference computations the tests compare against.

Everything here is written directly from the objective definitions with
plain numpy, on purpose: none of it shares code with the package.
"""

import numpy as np


def objective(beta, design, response, weights):
    """0.5 ||y - X b||^2 + sum w |b|, straight from the formula."""
    r = response - design @ np.asarray(beta, dtype=np.float64)
    return 0.5 * float(r @ r) + float(weights @ np.abs(beta))


def soft_threshold(q, w):
    """Closed-form solution for an orthonormal design: X'X = I."""
    return np.sign(q) * np.maximum(np.abs(q) - w, 0.0)


def orthonormal_problem(rng, n, k):
    """Design with exactly orthonormal columns plus a random response."""
    q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    y = rng.standard_normal(n)
    w = rng.uniform(0.0, 1.0, k)
    return q, y, w


def grid_search_min(design, response, weights, lo=-5.0, hi=5.0, step=1e-2):
    """Exact minimum of the lasso objective over the grid, k <= 3.

    k <= 2 is brute force. For k = 3 the third coordinate is minimized
    analytically per (b1, b2) grid cell: the objective is convex in b3, so
    its grid minimum sits at a grid neighbor of the continuous minimizer,
    at the kink 0, or at a boundary, all of which are evaluated.
    """
    x = np.asarray(design, dtype=np.float64)
    y = np.asarray(response, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    k = x.shape[1]
    g = x.T @ x
    q = x.T @ y
    const = 0.5 * float(y @ y)
    grid = np.round(np.arange(lo, hi + step / 2, step), 10)

    def quad(b):
        return 0.5 * np.einsum("...i,ij,...j->...", b, g, b) - b @ q

    if k == 1:
        b = grid[:, None]
        vals = quad(b) + w[0] * np.abs(grid)
        return const + float(vals.min())
    if k == 2:
        b1, b2 = np.meshgrid(grid, grid, indexing="ij")
        vals = (
            0.5 * (g[0, 0] * b1**2 + 2 * g[0, 1] * b1 * b2 + g[1, 1] * b2**2)
            - q[0] * b1
            - q[1] * b2
            + w[0] * np.abs(b1)
            + w[1] * np.abs(b2)
        )
        return const + float(vals.min())

    b1, b2 = np.meshgrid(grid, grid, indexing="ij")
    base = (
        0.5 * (g[0, 0] * b1**2 + 2 * g[0, 1] * b1 * b2 + g[1, 1] * b2**2)
        - q[0] * b1
        - q[1] * b2
        + w[0] * np.abs(b1)
        + w[1] * np.abs(b2)
    )
    c = g[0, 2] * b1 + g[1, 2] * b2 - q[2]
    star = soft_threshold(-c, w[2]) / g[2, 2]
    best = np.full(b1.shape, np.inf)
    lowered = np.clip(np.floor(star / step) * step, lo, hi)
    for cand in (lowered, lowered + step, np.zeros_like(star)):
        b3 = np.clip(cand, lo, hi)
        vals = base + 0.5 * g[2, 2] * b3**2 + c * b3 + w[2] * np.abs(b3)
        np.minimum(best, vals, out=best)
    return const + float(best.min())


def hamming_pairs(a_pairs, b_pairs):
    """Symmetric-difference count over unordered pair sets."""
    return len(set(a_pairs) ^ set(b_pairs))
