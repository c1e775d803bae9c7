"""Hermite polynomials and harmonic-oscillator eigenfunctions.

Everything works in natural oscillator units (hbar = M = omega = 1), where
the n-th eigenfunction of a single mode is

    psi_n(x) = H_n(x) exp(-x^2/2) / sqrt(2^n n! sqrt(pi))

with H_n the physicists' Hermite polynomials.  Raw H_n values grow like
2^n n! and overflow quickly, so the eigenfunction table is built with a
prenormalized recurrence whose intermediates stay O(1).
"""

import numpy as np

__all__ = [
    "hermite_values",
    "oscillator_eigenfunctions",
    "oscillator_derivatives",
]


def hermite_values(max_order: int, x) -> np.ndarray:
    """Table of physicists' Hermite polynomials H_0..H_max_order at x.

    Parameters
    ----------
    max_order : highest polynomial order in the table, >= 0.
    x : scalar or array of evaluation points.

    Returns
    -------
    Array of shape (max_order + 1,) + shape(x); row k holds H_k(x).

    Uses the three-term recurrence H_{k+1} = 2 x H_k - 2 k H_{k-1}.
    Values overflow for large order and argument; use
    oscillator_eigenfunctions for anything that has to reach high order.
    """
    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    x = np.asarray(x, dtype=float)
    out = np.empty((max_order + 1,) + x.shape)
    out[0] = 1.0
    if max_order >= 1:
        out[1] = 2.0 * x
    for k in range(1, max_order):
        out[k + 1] = 2.0 * x * out[k] - 2.0 * k * out[k - 1]
    return out


def oscillator_eigenfunctions(max_order: int, x) -> np.ndarray:
    """Table of normalized oscillator eigenfunctions psi_0..psi_max_order.

    Row k holds psi_k(x) = H_k(x) exp(-x^2/2) / sqrt(2^k k! sqrt(pi)),
    evaluated through the prenormalized recurrence

        psi_{k+1} = sqrt(2/(k+1)) x psi_k - sqrt(k/(k+1)) psi_{k-1}

    so no intermediate ever exceeds O(1).  Safe to order 200 and beyond
    for |x| up to 20.
    """
    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    x = np.asarray(x, dtype=float)
    out = np.empty((max_order + 1,) + x.shape)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if max_order >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(1, max_order):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * x * out[k] \
            - np.sqrt(k / (k + 1.0)) * out[k - 1]
    return out


def oscillator_derivatives(max_order: int, x, values: np.ndarray | None = None) -> np.ndarray:
    """Table of first derivatives psi_0'..psi_max_order' at x.

    Uses the ladder identity psi_k'(x) = sqrt(2k) psi_{k-1}(x) - x psi_k(x),
    which only touches already-normalized eigenfunction values and is
    therefore as overflow-safe as the table itself.  Pass a precomputed
    eigenfunction table through `values` to avoid recomputing it.
    """
    x = np.asarray(x, dtype=float)
    if values is None:
        values = oscillator_eigenfunctions(max_order, x)
    out = np.empty_like(values)
    out[0] = -x * values[0]
    for k in range(1, max_order + 1):
        out[k] = np.sqrt(2.0 * k) * values[k - 1] - x * values[k]
    return out
