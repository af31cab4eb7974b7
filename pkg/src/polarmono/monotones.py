"""Polarization monotones, spectral distances and distance-to-set measures.

Every monotone acts on sorted spectra along the last axis, so it accepts a
single :class:`~polarmono.polmat.PolarizationState`, one spectrum, or a
stack of spectra of shape ``(n, d)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._validation import PolarizationError, check_spectra
from .orders import Theory, simplex_lattice
from .polmat import SIMPLEX_VERTICES

__all__ = [
    "p2d",
    "p2d_determinant",
    "sskf",
    "von_neumann",
    "h_phi",
    "linear",
    "edpw",
    "rel_entropy_to_unpolarized",
    "EntropicPair",
    "ENTROPIC_PAIRS",
    "DistanceKind",
    "distance",
    "half_trace_distance",
    "geometric_measure",
    "unpolarized_segment",
    "Monotone",
    "MONOTONES",
    "get_monotone",
    "ContourDataset",
    "isopolarization_grid",
]

LN3 = math.log(3.0)


def _scalar(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)


def p2d(s):
    """Degree of polarization of a 2D field, ``rho1 - rho2``."""
    x = check_spectra(s, dim=2)
    return _scalar(x[..., 0] - x[..., 1])


def p2d_determinant(s):
    """Same quantity through ``sqrt(1 - 4 det rho)``; kept as a cross-check."""
    x = check_spectra(s, dim=2)
    det = x[..., 0] * x[..., 1]
    return _scalar(np.sqrt(np.clip(1 - 4 * det, 0.0, None)))


def sskf(s):
    """Purity-based degree of polarization, ``sqrt(3/2 (tr rho^2 - 1/3))``."""
    x = check_spectra(s, dim=3)
    purity = np.sum(x * x, axis=-1)
    return _scalar(np.sqrt(np.clip(1.5 * (purity - 1 / 3), 0.0, None)))


def von_neumann(s):
    """``1 - S(rho) / ln 3`` with the Shannon entropy of the spectrum."""
    x = check_spectra(s, dim=3)
    entropy = -np.sum(_xlogx(x), axis=-1)
    return _scalar(1 - entropy / LN3)


def linear(s):
    """Gap between the largest and smallest eigenvalue."""
    x = check_spectra(s, dim=3)
    return _scalar(x[..., 0] - x[..., 2])


def edpw(s):
    """Gap between the two largest eigenvalues; zero exactly on the segment U."""
    x = check_spectra(s, dim=3)
    return _scalar(x[..., 0] - x[..., 1])


def rel_entropy_to_unpolarized(s):
    """Minimum relative entropy to the unpolarized segment of the convex theory.

    The minimizer averages the two largest eigenvalues and keeps the third,
    so the value is ``S(rho || ((r1 + r2)/2, (r1 + r2)/2, r3))``.  It is not
    normalized: the fully polarized state reaches ``ln 2``.
    """
    x = check_spectra(s, dim=3)
    m = (x[..., 0] + x[..., 1]) / 2
    val = _xlogx(x[..., 0]) + _xlogx(x[..., 1]) - (x[..., 0] + x[..., 1]) * np.log(m)
    return _scalar(np.clip(val, 0.0, None))


@dataclass(frozen=True, eq=False)
class EntropicPair:
    """Functional pair ``(h, phi)`` defining ``S = h(sum_i phi(rho_i))``.

    Both callables must accept numpy arrays.  The pair is checked on a
    sample grid at construction: ``phi(0) = 0``, ``h(phi(1)) = 0`` and
    either (h increasing, phi concave) or (h decreasing, phi convex).
    """

    name: str
    h: object
    phi: object
    check_tol: float = field(default=1e-10, repr=False)

    def __post_init__(self):
        phi0 = float(self.phi(np.array(0.0)))
        if abs(phi0) > self.check_tol:
            raise PolarizationError(f"{self.name}: phi(0) must vanish, got {phi0:.3g}")
        top = float(self.h(np.array(self.phi(np.array(1.0)))))
        if abs(top) > self.check_tol:
            raise PolarizationError(f"{self.name}: h(phi(1)) must vanish, got {top:.3g}")

        xs = np.linspace(0.0, 1.0, 401)
        curv = np.diff(self.phi(xs), 2)
        lo, hi = sorted([float(self.phi(np.array(1.0))), 3 * float(self.phi(np.array(1 / 3)))])
        hs = np.diff(self.h(np.linspace(lo, hi, 401)))
        slack = self.check_tol * 10
        increasing = np.all(hs >= -slack)
        decreasing = np.all(hs <= slack)
        concave = np.all(curv <= slack)
        convex = np.all(curv >= -slack)
        if not ((increasing and concave) or (decreasing and convex)):
            raise PolarizationError(
                f"{self.name}: need increasing h with concave phi or decreasing h with convex phi"
            )
        if self.normalizer == 0:
            raise PolarizationError(f"{self.name}: degenerate pair, h(3 phi(1/3)) = 0")

    @cached_property
    def normalizer(self):
        return float(self.h(np.array(3 * self.phi(np.array(1 / 3)))))

    def entropy(self, x):
        return self.h(np.sum(self.phi(x), axis=-1))


def _shannon_phi(x):
    return -_xlogx(x)


def _tsallis(q):
    return EntropicPair(f"tsallis{q:g}", lambda y: y, lambda x: (x - np.power(x, q)) / (q - 1))


def _renyi(alpha):
    return EntropicPair(
        f"renyi{alpha:g}",
        lambda y: np.log(y) / (1 - alpha),
        lambda x: np.power(x, alpha),
    )


ENTROPIC_PAIRS = {
    pair.name: pair
    for pair in [
        EntropicPair("shannon", lambda y: y, _shannon_phi),
        EntropicPair("quadratic", lambda y: 1 - y, lambda x: x * x),
        _tsallis(2),
        _tsallis(3),
        _renyi(0.5),
        _renyi(2),
    ]
}


def h_phi(s, pair):
    """Normalized ``(h, phi)``-entropy degree of polarization.

    ``pair`` is an :class:`EntropicPair` or the name of a registered one.
    """
    if isinstance(pair, str):
        try:
            pair = ENTROPIC_PAIRS[pair]
        except KeyError:
            raise PolarizationError(f"unknown entropic pair {pair!r}") from None
    x = check_spectra(s, dim=3)
    return _scalar(1 - pair.entropy(x) / pair.normalizer)


class DistanceKind(str, enum.Enum):
    TRACE = "trace"
    HILBERT_SCHMIDT = "hs"
    RELATIVE_ENTROPY = "re"
    LIN_SPECTRAL = "lin"


def _distance(a, b, kind):
    if kind is DistanceKind.TRACE:
        return np.sum(np.abs(a - b), axis=-1)
    if kind is DistanceKind.HILBERT_SCHMIDT:
        return np.sqrt(np.sum((a - b) ** 2, axis=-1))
    if kind is DistanceKind.LIN_SPECTRAL:
        return np.abs(a[..., 0] - b[..., 0]) + np.abs(a[..., -1] - b[..., -1])
    a, b = np.broadcast_arrays(a, b)
    mismatch = np.any((a > 0) & (b <= 0), axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logb = np.log(np.where(b > 0, b, 1.0))
    val = np.sum(_xlogx(a) - np.where(a > 0, a * logb, 0.0), axis=-1)
    return np.where(mismatch, np.inf, val)


def distance(a, b, kind):
    """Distance between canonical spectra.

    ``TRACE`` is the plain l1 distance ``sum |a_i - b_i|`` (no factor 1/2);
    see :func:`half_trace_distance` for the halved variant.  The relative
    entropy ``S(a || b)`` is ``inf`` when ``b`` vanishes where ``a`` does not.
    """
    kind = DistanceKind(kind)
    x = check_spectra(a)
    y = check_spectra(b)
    if x.shape[-1] != y.shape[-1]:
        raise PolarizationError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    return _scalar(_distance(x, y, kind))


def half_trace_distance(a, b):
    """``(1/2) tr|rho - sigma|`` for commuting (diagonal) states."""
    return _scalar(0.5 * distance(a, b, DistanceKind.TRACE))


def unpolarized_segment(t):
    """Spectrum ``(t, t, 1 - 2t)`` on the segment joining 3U (t=1/3) and 2U (t=1/2)."""
    t = np.asarray(t, dtype=float)
    return np.stack([t, t, 1 - 2 * t], axis=-1)


_GOLDEN = (math.sqrt(5) - 1) / 2


def _golden_min(f, lo, hi, xtol=1e-10):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    t = (a + b) / 2
    return t, f(t)


def geometric_measure(s, kind, theory, grid=10_000, closed_form=False):
    """Distance from ``s`` to the unpolarized set of ``theory``.

    For the singleton sets this is one evaluation.  For the convex theory
    the segment is scanned on ``grid`` points and the best bracket is
    refined by golden-section search (all four distances are convex along
    the segment).  With ``closed_form=True`` the known minimizer
    ``t = (rho1 + rho2) / 2`` is used for the trace and relative-entropy
    distances instead of the search.
    """
    kind = DistanceKind(kind)
    theory = Theory.parse(theory)
    if int(grid) < 2:
        raise PolarizationError(f"grid must be >= 2, got {grid}")
    x = check_spectra(s, dim=theory.dim)
    if x.ndim != 1:
        raise PolarizationError("geometric_measure takes a single state")

    if theory is Theory.TWO_D_UNITAL:
        return float(_distance(x, np.full(2, 0.5), kind))
    if theory is Theory.THREE_D_UNITAL:
        return float(_distance(x, np.full(3, 1 / 3), kind))

    if closed_form and kind in (DistanceKind.TRACE, DistanceKind.RELATIVE_ENTROPY):
        return float(_distance(x, unpolarized_segment((x[0] + x[1]) / 2), kind))

    ts = np.linspace(1 / 3, 0.5, int(grid))
    vals = _distance(x, unpolarized_segment(ts), kind)
    i = int(np.argmin(vals))
    best = float(vals[i])
    if not math.isfinite(best):
        return best
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)]
    _, refined = _golden_min(lambda t: float(_distance(x, unpolarized_segment(t), kind)), lo, hi)
    return min(best, refined)


@dataclass(frozen=True)
class Monotone:
    """A registered polarization measure and the theory it is monotone for."""

    name: str
    func: object = field(repr=False)
    theory: Theory
    normalized: bool = True

    def __call__(self, s):
        return self.func(s)


def _hphi_monotone(pair_name):
    pair = ENTROPIC_PAIRS[pair_name]
    return Monotone(f"hphi:{pair_name}", lambda s: h_phi(s, pair), Theory.THREE_D_UNITAL)


MONOTONES = {
    m.name: m
    for m in [
        Monotone("p2d", p2d, Theory.TWO_D_UNITAL),
        Monotone("sskf", sskf, Theory.THREE_D_UNITAL),
        Monotone("vn", von_neumann, Theory.THREE_D_UNITAL),
        Monotone("lin", linear, Theory.THREE_D_UNITAL),
        Monotone("edpw", edpw, Theory.THREE_D_CONVEX),
        Monotone("re", rel_entropy_to_unpolarized, Theory.THREE_D_CONVEX, normalized=False),
        *(_hphi_monotone(name) for name in ENTROPIC_PAIRS),
    ]
}


def get_monotone(name):
    """Look up a monotone by its identifier (``"sskf"``, ``"hphi:renyi2"``, ...)."""
    if isinstance(name, Monotone):
        return name
    try:
        return MONOTONES[name]
    except KeyError:
        known = ", ".join(MONOTONES)
        raise PolarizationError(f"unknown monotone {name!r} (known: {known})") from None


@dataclass(frozen=True, eq=False)
class ContourDataset:
    """Monotone values on the simplex lattice, for isopolarization plots."""

    monotone: str
    points: np.ndarray
    spectrum: np.ndarray
    values: np.ndarray

    def __len__(self):
        return len(self.values)

    def to_records(self):
        return [
            {
                "x": float(p[0]),
                "y": float(p[1]),
                "rho1": float(s[0]),
                "rho2": float(s[1]),
                "rho3": float(s[2]),
                "value": float(v),
            }
            for p, s, v in zip(self.points, self.spectrum, self.values)
        ]


def isopolarization_grid(monotone, resolution=200, domain="full"):
    """Evaluate a 3D monotone on every node of the simplex lattice.

    Nodes off the sorted triangle are evaluated through their sorted
    spectrum, so the full-simplex picture shows the six mirror images of
    the polarization space.
    """
    m = get_monotone(monotone)
    if m.theory.dim != 3:
        raise PolarizationError(f"monotone {m.name!r} is not defined for 3D fields")
    nodes = simplex_lattice(resolution, domain)
    canon = -np.sort(-nodes, axis=1)
    values = np.atleast_1d(np.asarray(m(canon), dtype=float))
    return ContourDataset(m.name, nodes @ SIMPLEX_VERTICES, nodes, values)

