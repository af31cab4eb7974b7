"""Majorization order, convex-mixing preorder and comparability regions."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._validation import (
    DEFAULT_TOL,
    PolarizationError,
    check_resolution,
    check_spectra,
)
from .polmat import SIMPLEX_VERTICES, PolarizationState

__all__ = [
    "Theory",
    "Relation",
    "OrderVerdict",
    "RegionDataset",
    "is_unpolarized",
    "majorizes",
    "compare",
    "convex_obtainable",
    "classify_regions",
    "simplex_lattice",
]


class Theory(str, enum.Enum):
    """Pairing of an unpolarized set with the order it induces."""

    TWO_D_UNITAL = "2d"
    THREE_D_UNITAL = "3d-majorization"
    THREE_D_CONVEX = "3d-convex"

    @property
    def dim(self):
        return 2 if self is Theory.TWO_D_UNITAL else 3

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value))
        except ValueError:
            names = ", ".join(t.value for t in cls)
            raise PolarizationError(f"unknown theory {value!r} (expected one of {names})") from None


class Relation(str, enum.Enum):
    LESS = "Less"
    GREATER = "Greater"
    EQUIVALENT = "Equivalent"
    INCOMPARABLE = "Incomparable"


@dataclass(frozen=True)
class OrderVerdict:
    """Outcome of comparing ``a`` against ``b``.

    ``relation`` is Less when ``a`` is below ``b`` (less polarized).  Under
    the convex-mixing theory a strict verdict carries the witness
    ``(p, omega)`` expressing the smaller state as ``p * larger + (1 - p) * omega``.
    """

    relation: Relation
    witness: tuple | None = None

    def to_dict(self):
        out = {"relation": self.relation.value}
        if self.witness is not None:
            p, omega = self.witness
            out["witness"] = {"p": float(p), "omega": [float(v) for v in omega]}
        return out


def _theory_spectrum(s, theory, tol):
    theory = Theory.parse(theory)
    try:
        return check_spectra(s, dim=theory.dim, tol=max(tol, DEFAULT_TOL)), theory
    except PolarizationError as exc:
        raise PolarizationError(f"{exc} (theory {theory.value})") from None


def is_unpolarized(s, theory, tol=DEFAULT_TOL):
    """Membership in the unpolarized set of ``theory``."""
    x, theory = _theory_spectrum(s, theory, tol)
    if theory is Theory.TWO_D_UNITAL:
        return bool(abs(x[0] - 0.5) <= tol)
    if theory is Theory.THREE_D_UNITAL:
        return bool(np.max(np.abs(x - 1 / 3)) <= tol)
    return bool(_in_segment(x, tol))


def majorizes(sigma, rho, tol=DEFAULT_TOL):
    """True when ``rho`` is majorized by ``sigma`` (``rho`` ≺ ``sigma``).

    Compares the partial sums of the sorted spectra; the last one is fixed
    by normalization.
    """
    a = check_spectra(sigma, tol=max(tol, DEFAULT_TOL))
    b = check_spectra(rho, tol=max(tol, DEFAULT_TOL))
    if a.shape != b.shape:
        raise PolarizationError(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    return _partial_sums_dominate(a, b, tol)


def _partial_sums_dominate(a, b, tol):
    return bool((np.cumsum(b)[:-1] - np.cumsum(a)[:-1]).max() <= tol)


def _in_segment(x, tol):
    return x[0] - x[1] <= tol


def convex_obtainable(rho, sigma, tol=DEFAULT_TOL):
    """Solve ``rho = p * sigma + (1 - p) * omega`` with ``omega`` unpolarized.

    ``omega`` is restricted to the segment ``(s, s, 1 - 2s)``, ``s`` in
    ``[1/3, 1/2]``.  Returns ``(p, omega)`` when a solution exists and
    ``None`` otherwise.
    """
    r = check_spectra(rho, dim=3, tol=max(tol, DEFAULT_TOL))
    g = check_spectra(sigma, dim=3, tol=max(tol, DEFAULT_TOL))
    centroid = np.full(3, 1 / 3)

    gap = g[0] - g[1]
    if gap <= tol:
        # sigma is unpolarized; mixtures of unpolarized states stay unpolarized
        if _in_segment(r, tol):
            return 0.0, r.copy()
        return None

    p = (r[0] - r[1]) / gap
    if p < -tol or p > 1 + tol:
        return None
    p = min(max(p, 0.0), 1.0)
    if p >= 1 - tol:
        if np.max(np.abs(r - g)) <= tol:
            return 1.0, centroid
        return None

    s = (r[0] - p * g[0]) / (1 - p)
    if s < 1 / 3 - tol or s > 0.5 + tol:
        return None
    s = min(max(s, 1 / 3), 0.5)
    omega = np.array([s, s, 1 - 2 * s])
    if np.max(np.abs(p * g + (1 - p) * omega - r)) > tol:
        return None
    return p, omega


def compare(a, b, theory, tol=DEFAULT_TOL):
    """Relation of state ``a`` to state ``b`` under ``theory``."""
    x, theory = _theory_spectrum(a, theory, tol)
    y, _ = _theory_spectrum(b, theory, tol)

    if theory is Theory.THREE_D_CONVEX:
        down = convex_obtainable(x, y, tol)
        up = convex_obtainable(y, x, tol)
        if down is not None and up is not None:
            return OrderVerdict(Relation.EQUIVALENT)
        if down is not None:
            return OrderVerdict(Relation.LESS, down)
        if up is not None:
            return OrderVerdict(Relation.GREATER, up)
        return OrderVerdict(Relation.INCOMPARABLE)

    below = _partial_sums_dominate(y, x, tol)
    above = _partial_sums_dominate(x, y, tol)
    if below and above:
        return OrderVerdict(Relation.EQUIVALENT)
    if below:
        return OrderVerdict(Relation.LESS)
    if above:
        return OrderVerdict(Relation.GREATER)
    return OrderVerdict(Relation.INCOMPARABLE)


def simplex_lattice(resolution, domain="sorted"):
    """Barycentric lattice ``(i, j, k) / resolution`` on the 2-simplex.

    Parameters
    ----------
    resolution : int
        Subdivisions per side.
    domain : {"sorted", "full"}
        ``"full"`` returns all ``(n + 1)(n + 2) / 2`` nodes; ``"sorted"``
        keeps only nodes with ``i >= j >= k``.

    Returns
    -------
    nodes : ndarray, shape (m, 3)
        Lattice points in row-major order over ``(i, j)``.
    """
    n = check_resolution(resolution)
    if domain not in ("sorted", "full"):
        raise PolarizationError(f"domain must be 'sorted' or 'full', got {domain!r}")
    i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    i, j = i.ravel(), j.ravel()
    k = n - i - j
    keep = k >= 0
    if domain == "sorted":
        keep &= (i >= j) & (j >= k)
    ijk = np.column_stack([i[keep], j[keep], k[keep]])
    return ijk / n


@dataclass(frozen=True, eq=False)
class RegionDataset:
    """Lattice nodes labelled by their relation to a reference state.

    Each row of ``points`` holds the planar coordinates, ``spectrum`` the
    lattice node and ``labels`` the relation of the node to ``reference``.
    """

    reference: PolarizationState
    theory: Theory
    points: np.ndarray
    spectrum: np.ndarray
    labels: np.ndarray

    def __len__(self):
        return len(self.labels)

    def counts(self):
        return {r.value: int(np.sum(self.labels == r.value)) for r in Relation}

    def label_of(self, spectrum, atol=1e-12):
        """Label of the lattice node equal to ``spectrum`` (``KeyError`` if absent)."""
        hit = np.flatnonzero(np.all(np.abs(self.spectrum - np.asarray(spectrum)) < atol, axis=1))
        if hit.size == 0:
            raise KeyError(f"{spectrum} is not a lattice node")
        return self.labels[hit[0]]

    def to_records(self):
        return [
            {
                "x": float(p[0]),
                "y": float(p[1]),
                "rho1": float(s[0]),
                "rho2": float(s[1]),
                "rho3": float(s[2]),
                "label": str(lab),
            }
            for p, s, lab in zip(self.points, self.spectrum, self.labels)
        ]


def classify_regions(reference, theory, resolution=200, tol=DEFAULT_TOL, domain="sorted"):
    """Label every lattice node by ``compare(node, reference, theory)``.

    With ``domain="full"`` nodes off the sorted triangle are compared
    through their sorted (canonical) spectrum.
    """
    ref, theory = _theory_spectrum(reference, theory, tol)
    if theory.dim != 3:
        raise PolarizationError("region classification needs a 3D theory")
    nodes = simplex_lattice(resolution, domain)
    canon = -np.sort(-nodes, axis=1)
    labels = np.array([compare(c, ref, theory, tol).relation.value for c in canon], dtype=object)
    return RegionDataset(
        reference=PolarizationState(ref),
        theory=theory,
        points=nodes @ SIMPLEX_VERTICES,
        spectrum=nodes,
        labels=labels,
    )
