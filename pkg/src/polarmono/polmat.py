"""Polarization matrices, canonical states and extremal decompositions.

A spectral polarization (coherency) matrix is the ensemble average of
``E_i conj(E_j)`` over field realizations.  After normalization to unit
trace it behaves like a density matrix, and every basis-independent
polarization quantity depends only on its sorted eigenvalues.  The sorted
spectrum is therefore used as the canonical representative of a state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import (
    DEFAULT_TOL,
    PolarizationError,
    check_dim,
    check_hermitian,
    check_spectra,
)

__all__ = [
    "PolarizationMatrix",
    "PolarizationState",
    "ExtremalDecomposition",
    "from_field_samples",
    "normalize",
    "eigen_hermitian",
    "canonical_state",
    "decompose_extremal",
    "barycentric_coords",
    "SIMPLEX_VERTICES",
    "fully_polarized",
    "unpolarized",
]

#: Planar vertices used to draw the 2-simplex (first axis on top).
SIMPLEX_VERTICES = np.array(
    [
        [0.0, 1.0],
        [-math.sqrt(3) / 2, -0.5],
        [math.sqrt(3) / 2, -0.5],
    ]
)

_JACOBI_OFF_TOL = 1e-13
_JACOBI_MAX_SWEEPS = 50


def _readonly(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PolarizationMatrix:
    """Hermitian positive semidefinite coherency matrix.

    Parameters
    ----------
    entries : array_like, shape (d, d)
        Complex second moments ``<E_i E_j*>``, with ``d`` in {2, 3}.
    tol : float
        Tolerance used for the Hermiticity and positivity checks.
    """

    entries: np.ndarray
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        M = check_hermitian(self.entries, self.tol, name="polarization matrix")
        M = (M + M.conj().T) / 2
        w, _ = eigen_hermitian(M, tol=self.tol)
        scale = max(1.0, float(np.max(np.abs(M))))
        if w[-1] < -self.tol * scale:
            raise PolarizationError(
                f"polarization matrix is not positive semidefinite (min eigenvalue {w[-1]:.3g})"
            )
        object.__setattr__(self, "entries", _readonly(M))

    @property
    def dim(self):
        return self.entries.shape[0]

    @property
    def intensity(self):
        """Total intensity, the (real) trace."""
        return float(np.trace(self.entries).real)

    def to_dict(self):
        return {
            "dim": self.dim,
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in self.entries],
        }

    @classmethod
    def from_dict(cls, data, tol=DEFAULT_TOL):
        try:
            dim = int(data["dim"])
            raw = np.asarray(data["entries"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise PolarizationError(f"malformed matrix document: {exc}") from exc
        if raw.shape != (dim, dim, 2):
            raise PolarizationError(
                f"entries must have shape ({dim}, {dim}, 2) for dim={dim}, got {raw.shape}"
            )
        return cls(raw[..., 0] + 1j * raw[..., 1], tol=tol)

    def __eq__(self, other):
        if not isinstance(other, PolarizationMatrix):
            return NotImplemented
        return self.entries.shape == other.entries.shape and np.array_equal(
            self.entries, other.entries
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class PolarizationState:
    """Point of the polarization space: a sorted probability spectrum.

    The constructor sorts its input in nonincreasing order, so any
    permutation of the eigenvalues yields the same canonical state.
    """

    spectrum: np.ndarray
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        x = np.sort(np.asarray(self.spectrum, dtype=float))[::-1]
        if x.ndim != 1:
            raise PolarizationError("a state holds a single one-dimensional spectrum")
        x = check_spectra(x, tol=self.tol)
        object.__setattr__(self, "spectrum", _readonly(x))

    @property
    def dim(self):
        return self.spectrum.shape[0]

    def as_matrix(self):
        """Diagonal density matrix of the canonical representative."""
        return np.diag(self.spectrum).astype(complex)

    def __eq__(self, other):
        if not isinstance(other, PolarizationState):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.spectrum, other.spectrum)

    def __hash__(self):
        return hash(tuple(self.spectrum))

    def __repr__(self):
        vals = ", ".join(f"{v:.6g}" for v in self.spectrum)
        return f"PolarizationState([{vals}])"


def fully_polarized(dim=3):
    """The unique fully polarized state, spectrum (1, 0, ..., 0)."""
    check_dim(dim)
    return PolarizationState(np.eye(dim)[0])


def unpolarized(dim=3, rank=None):
    """Uniform state over ``rank`` components (defaults to ``dim``)."""
    check_dim(dim)
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise PolarizationError(f"rank must be in [1, {dim}]")
    x = np.zeros(dim)
    x[:rank] = 1.0 / rank
    return PolarizationState(x)


@dataclass(frozen=True, eq=False)
class ExtremalDecomposition:
    """Weights on the extreme points (1P, 2U[, 3U]) of the polarization space."""

    coefficients: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _readonly(np.asarray(self.coefficients, float)))

    @property
    def dim(self):
        return self.coefficients.shape[0]

    @staticmethod
    def extreme_points(dim):
        """Rows are the spectra of the fully polarized and uniform-rank states."""
        return np.array([unpolarized(dim, k).spectrum for k in range(1, dim + 1)])

    def reconstruct(self):
        return self.coefficients @ self.extreme_points(self.dim)


def from_field_samples(samples, tol=DEFAULT_TOL):
    """Estimate the coherency matrix from field realizations.

    Parameters
    ----------
    samples : array_like, shape (n_realizations, d)
        Complex field components, one realization per row.

    Returns
    -------
    PolarizationMatrix
    """
    try:
        rows = [np.asarray(v, dtype=complex).ravel() for v in samples]
    except TypeError as exc:
        raise PolarizationError(f"samples must be a sequence of complex vectors: {exc}") from exc
    if not rows:
        raise PolarizationError("at least one field realization is required")
    dims = {r.shape[0] for r in rows}
    if len(dims) != 1:
        raise PolarizationError(f"all realizations must share a dimension, got {sorted(dims)}")
    E = np.vstack(rows)
    check_dim(E.shape[1])
    phi = np.einsum("ni,nj->ij", E, E.conj()) / E.shape[0]
    return PolarizationMatrix((phi + phi.conj().T) / 2, tol=tol)


def normalize(phi, tol=DEFAULT_TOL):
    """Divide a coherency matrix by its intensity, giving a unit-trace matrix."""
    if not isinstance(phi, PolarizationMatrix):
        phi = PolarizationMatrix(phi, tol=tol)
    intensity = phi.intensity
    if intensity <= tol:
        raise PolarizationError("zero-intensity field cannot be normalized")
    return np.array(phi.entries) / intensity


def eigen_hermitian(M, tol=DEFAULT_TOL):
    """Eigen-decomposition of a small Hermitian matrix by cyclic Jacobi rotations.

    Returns
    -------
    w : ndarray, shape (d,)
        Real eigenvalues sorted in nonincreasing order.
    V : ndarray, shape (d, d)
        Unitary matrix whose columns are the matching eigenvectors, so that
        ``V @ diag(w) @ V.conj().T`` reproduces ``M``.

    Notes
    -----
    Each rotation first removes the phase of the pivot ``A[p, q]`` with a
    diagonal unitary and then applies the real symmetric Jacobi rotation.
    Sweeps stop once the off-diagonal Frobenius mass falls below ``1e-13``
    relative to the Frobenius norm of ``M``.
    """
    A = check_hermitian(M, tol)
    A = (A + A.conj().T) / 2
    d = A.shape[0]
    V = np.eye(d, dtype=complex)
    scale = float(np.linalg.norm(A))
    pairs = [(p, q) for p in range(d - 1) for q in range(p + 1, d)]
    # Pivots below this size cannot keep the sweep loop alive, and rotating
    # them risks dividing by subnormal magnitudes.
    negligible = _JACOBI_OFF_TOL * scale / d

    for _ in range(_JACOBI_MAX_SWEEPS):
        off = math.sqrt(sum(abs(A[p, q]) ** 2 for p, q in pairs) * 2)
        if off <= _JACOBI_OFF_TOL * scale:
            break
        for p, q in pairs:
            b = A[p, q]
            mag = abs(b)
            if mag <= negligible:
                continue
            phase = b / mag
            theta = 0.5 * math.atan2(2 * mag, A[q, q].real - A[p, p].real)
            c, s = math.cos(theta), math.sin(theta)
            G = np.eye(d, dtype=complex)
            G[p, p] = c
            G[p, q] = s
            G[q, p] = -s * phase.conjugate()
            G[q, q] = c * phase.conjugate()
            A = G.conj().T @ A @ G
            V = V @ G
    else:
        raise PolarizationError("Jacobi eigensolver did not converge")

    w = A.diagonal().real
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def canonical_state(rho, tol=DEFAULT_TOL):
    """Sorted spectrum of a unit-trace polarization matrix.

    Tiny negative eigenvalues from round-off are clipped; anything beyond
    ``tol`` is rejected.
    """
    if isinstance(rho, PolarizationMatrix):
        rho = rho.entries
    rho = check_hermitian(rho, tol, name="density matrix")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise PolarizationError(f"density matrix must have unit trace, got {tr.real:.6g}")
    w, _ = eigen_hermitian(rho, tol=tol)
    return PolarizationState(w, tol=tol)


def decompose_extremal(s):
    """Convex weights of a state on the extreme points of the polarization space.

    >>> decompose_extremal(PolarizationState([0.5, 0.4, 0.1])).coefficients
    array([0.1, 0.6, 0.3])
    """
    x = check_spectra(s)
    d = x.shape[-1]
    k = np.arange(1, d + 1)
    nxt = np.append(x[1:], 0.0)
    return ExtremalDecomposition(k * (x - nxt))


def barycentric_coords(s):
    """Planar coordinates of a 3D state inside the drawn 2-simplex.

    The first spectral component points to the top vertex ``(0, 1)``.
    """
    x = check_spectra(s, dim=3, require_sorted=False)
    return x @ SIMPLEX_VERTICES
