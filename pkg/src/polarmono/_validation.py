"""Input validation helpers shared by the library and the estimators."""

from __future__ import annotations

import math
import numbers

import numpy as np

#: Default tolerance for Hermiticity, positivity and normalization checks.
DEFAULT_TOL = 1e-9


class PolarizationError(ValueError):
    """Raised when an input is not a valid polarization object."""


def check_dim(dim, allowed=(2, 3)):
    if dim not in allowed:
        raise PolarizationError(f"dimension must be one of {allowed}, got {dim}")
    return int(dim)


def check_tol(tol):
    if not isinstance(tol, numbers.Real) or not tol >= 0:
        raise PolarizationError(f"tolerance must be a nonnegative real, got {tol!r}")
    return float(tol)


def check_square(M, name="matrix"):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise PolarizationError(f"{name} must be square, got shape {M.shape}")
    check_dim(M.shape[0])
    if not np.all(np.isfinite(M)):
        raise PolarizationError(f"{name} contains non-finite entries")
    return M


def check_hermitian(M, tol=DEFAULT_TOL, name="matrix"):
    """Return ``M`` as a complex array after checking it is Hermitian.

    The check is relative to the largest entry so that unnormalized
    coherency matrices with large intensities are judged fairly.
    """
    M = check_square(M, name)
    scale = max(1.0, float(np.max(np.abs(M))))
    err = float(np.max(np.abs(M - M.conj().T)))
    if err > tol * scale:
        raise PolarizationError(f"{name} is not Hermitian (max |M - M^H| = {err:.3g})")
    return M


def check_spectra(x, dim=None, tol=DEFAULT_TOL, require_sorted=True):
    """Validate probability spectra along the last axis.

    Accepts a single spectrum of shape ``(d,)`` or a stack ``(..., d)``.
    Small violations (below ``tol``) are clipped to ``[0, 1]`` and
    renormalized; larger ones raise :class:`PolarizationError`.
    """
    if hasattr(x, "spectrum"):
        x = x.spectrum
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        raise PolarizationError("spectrum must be at least one-dimensional")
    d = x.shape[-1]
    if dim is not None and d != dim:
        raise PolarizationError(f"expected dimension {dim}, got {d}")
    check_dim(d)
    if x.size == 0:
        return x
    if x.ndim == 1:
        return _check_single_spectrum(x, tol, require_sorted)
    if not np.isfinite(x).all():
        raise PolarizationError("spectrum contains non-finite values")
    lo, hi = x.min(), x.max()
    if lo < -tol or hi > 1 + tol:
        raise PolarizationError("spectrum values must lie in [0, 1]")
    total = x.sum(axis=-1)
    if np.abs(total - 1).max() > tol:
        raise PolarizationError("spectrum must sum to 1")
    if require_sorted and d > 1 and (x[..., 1:] - x[..., :-1]).max() > tol:
        raise PolarizationError("spectrum must be sorted in nonincreasing order")
    if lo < 0 or hi > 1:
        x = np.clip(x, 0.0, 1.0)
        total = x.sum(axis=-1)
    if np.any(total != 1):
        x = x / np.expand_dims(total, -1)
    return x


def _check_single_spectrum(x, tol, require_sorted):
    # numpy reductions dominate the cost on 2- and 3-element arrays
    vals = x.tolist()
    if not all(math.isfinite(v) for v in vals):
        raise PolarizationError("spectrum contains non-finite values")
    lo, hi = min(vals), max(vals)
    if lo < -tol or hi > 1 + tol:
        raise PolarizationError("spectrum values must lie in [0, 1]")
    total = math.fsum(vals)
    if abs(total - 1) > tol:
        raise PolarizationError("spectrum must sum to 1")
    if require_sorted and any(b - a > tol for a, b in zip(vals, vals[1:])):
        raise PolarizationError("spectrum must be sorted in nonincreasing order")
    if lo < 0 or hi > 1:
        x = np.clip(x, 0.0, 1.0)
        total = float(x.sum())
    elif sum(vals) == 1:
        return x
    return x / total


def check_probability(p, name="p", tol=0.0):
    p = float(p)
    if not (-tol <= p <= 1 + tol):
        raise PolarizationError(f"{name} must lie in [0, 1], got {p}")
    return min(max(p, 0.0), 1.0)


def check_resolution(n, minimum=2):
    if isinstance(n, bool) or not isinstance(n, numbers.Integral) or n < minimum:
        raise PolarizationError(f"resolution must be an integer >= {minimum}, got {n!r}")
    return int(n)
