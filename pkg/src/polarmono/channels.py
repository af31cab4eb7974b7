"""Nonpolarizing operations: random-unitary channels and mixing channels.

Random-unitary channels realize the majorization order constructively:
given ``lam`` majorized by ``r``, a chain of T-transforms gives a doubly
stochastic ``D`` with ``D r = lam``, and its Birkhoff decomposition into
permutation matrices is a random-unitary channel taking ``diag(r)`` to
``diag(lam)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ._validation import (
    DEFAULT_TOL,
    PolarizationError,
    check_dim,
    check_probability,
    check_spectra,
    check_square,
)
from .orders import _partial_sums_dominate
from .polmat import PolarizationState, canonical_state

__all__ = [
    "RandomUnitaryChannel",
    "MixingChannel",
    "DoublyStochasticMatrix",
    "MajorizationError",
    "t_transform",
    "apply_random_unitary",
    "apply_mixing",
    "synthesize_doubly_stochastic",
    "birkhoff_decompose",
    "synthesize_uhlmann",
    "sample_haar_unitary",
    "random_unitary_channel",
    "is_unital",
    "channel_from_dict",
]

UNITARY_TOL = 1e-10


class MajorizationError(PolarizationError):
    """The target spectrum is not majorized by the source spectrum."""


def _complex_to_pairs(M):
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def _pairs_to_complex(raw):
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 3 or raw.shape[-1] != 2:
        raise PolarizationError(f"matrix must be nested [re, im] pairs, got shape {raw.shape}")
    return raw[..., 0] + 1j * raw[..., 1]


@dataclass(frozen=True, eq=False)
class RandomUnitaryChannel:
    """``rho -> sum_k w_k U_k rho U_k^H`` with probability weights ``w_k``."""

    weights: np.ndarray
    unitaries: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        U = np.asarray(self.unitaries, dtype=complex)
        if U.ndim == 2:
            U = U[None]
        if w.size == 0 or U.ndim != 3 or U.shape[0] != w.size or U.shape[1] != U.shape[2]:
            raise PolarizationError("need one square unitary per weight")
        check_dim(U.shape[1])
        if np.any(w < 0) or abs(w.sum() - 1) > UNITARY_TOL:
            raise PolarizationError(f"weights must be nonnegative and sum to 1, got sum {w.sum():.6g}")
        eye = np.eye(U.shape[1])
        err = np.max(np.abs(U @ np.conj(np.swapaxes(U, 1, 2)) - eye))
        if err > UNITARY_TOL:
            raise PolarizationError(f"channel term is not unitary (max |U U^H - I| = {err:.3g})")
        w.setflags(write=False)
        U.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "unitaries", U)

    @property
    def dim(self):
        return self.unitaries.shape[1]

    @property
    def terms(self):
        return list(zip(self.weights, self.unitaries))

    def __call__(self, rho):
        return apply_random_unitary(self, rho)

    def to_dict(self):
        return {
            "kind": "random_unitary",
            "terms": [{"w": float(w), "U": _complex_to_pairs(U)} for w, U in self.terms],
        }


@dataclass(frozen=True, eq=False)
class MixingChannel:
    """``rho -> p rho + (1 - p) omega`` with ``omega`` on the unpolarized segment."""

    p: float
    omega: PolarizationState

    def __post_init__(self):
        object.__setattr__(self, "p", check_probability(self.p))
        omega = self.omega
        if not isinstance(omega, PolarizationState):
            omega = PolarizationState(omega)
        if omega.dim != 3 or omega.spectrum[0] - omega.spectrum[1] > DEFAULT_TOL:
            raise PolarizationError("omega must be a 3D state with two equal leading eigenvalues")
        object.__setattr__(self, "omega", omega)

    def __call__(self, s):
        return apply_mixing(self, s)

    def to_dict(self):
        return {"kind": "mixing", "p": self.p, "omega": [float(v) for v in self.omega.spectrum]}


@dataclass(frozen=True, eq=False)
class DoublyStochasticMatrix:
    entries: np.ndarray

    def __post_init__(self):
        D = np.asarray(self.entries, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise PolarizationError("doubly stochastic matrix must be square")
        if np.any(D < -UNITARY_TOL):
            raise PolarizationError("doubly stochastic matrix has negative entries")
        if np.max(np.abs(D.sum(0) - 1)) > UNITARY_TOL or np.max(np.abs(D.sum(1) - 1)) > UNITARY_TOL:
            raise PolarizationError("rows and columns must each sum to 1")
        D = np.clip(D, 0.0, None)
        D.setflags(write=False)
        object.__setattr__(self, "entries", D)

    @property
    def dim(self):
        return self.entries.shape[0]


def channel_from_dict(data):
    """Build a channel from its JSON document."""
    try:
        kind = data["kind"]
        if kind == "random_unitary":
            terms = data["terms"]
            weights = [t["w"] for t in terms]
            unitaries = [_pairs_to_complex(t["U"]) for t in terms]
            return RandomUnitaryChannel(weights, np.stack(unitaries))
        if kind == "mixing":
            return MixingChannel(data["p"], data["omega"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, PolarizationError):
            raise
        raise PolarizationError(f"malformed channel document: {exc}") from exc
    raise PolarizationError(f"unknown channel kind {data.get('kind')!r}")


def apply_random_unitary(channel, rho):
    rho = check_square(rho, "density matrix")
    if rho.shape[0] != channel.dim:
        raise PolarizationError(f"dimension mismatch: channel {channel.dim}, state {rho.shape[0]}")
    U = channel.unitaries
    out = np.einsum("k,kij,jl,kml->im", channel.weights, U, rho, U.conj())
    return (out + out.conj().T) / 2


def apply_mixing(channel, s):
    x = check_spectra(s, dim=3)
    out = channel.p * x + (1 - channel.p) * channel.omega.spectrum
    return PolarizationState(out)


def t_transform(dim, i, j, t):
    """``t I + (1 - t) Q`` where ``Q`` swaps coordinates ``i`` and ``j``."""
    T = np.eye(dim)
    T[[i, j], [i, j]] = t
    T[i, j] = T[j, i] = 1 - t
    return T


def synthesize_doubly_stochastic(r, lam, tol=DEFAULT_TOL):
    """Doubly stochastic ``D`` with ``D @ r == lam`` built from T-transforms.

    Each step pairs the last coordinate where ``r`` still exceeds the target
    with the first later coordinate that falls short, and moves the smaller
    of the two discrepancies.  Every step fixes at least one coordinate, so
    at most ``d - 1`` transforms are used.

    Returns
    -------
    D : DoublyStochasticMatrix
    steps : list of (i, j, t)
        The T-transforms in the order they act on ``r``.
    """
    x = check_spectra(r, tol=max(tol, DEFAULT_TOL))
    y = check_spectra(lam, dim=x.shape[-1], tol=max(tol, DEFAULT_TOL))
    if x.ndim != 1:
        raise PolarizationError("synthesis takes a single pair of spectra")
    d = x.shape[0]
    _require_majorized(x, y, tol)

    # ``tol`` only governs the precondition; the construction itself runs
    # until the mismatch is at round-off level.
    eps = 4 * np.finfo(float).eps
    D = np.eye(d)
    steps = []
    cur = x.copy()
    for _ in range(d - 1):
        diff = cur - y
        over = np.flatnonzero(diff > eps)
        if over.size == 0:
            break
        j = over[-1]
        under = np.flatnonzero((diff < -eps) & (np.arange(d) > j))
        if under.size == 0:
            break
        k = under[0]
        delta = min(diff[j], -diff[k])
        t = 1 - delta / (cur[j] - cur[k])
        T = t_transform(d, j, k, t)
        cur = T @ cur
        D = T @ D
        steps.append((int(j), int(k), float(t)))
    return DoublyStochasticMatrix(D), steps


def _require_majorized(x, y, tol):
    if _partial_sums_dominate(x, y, tol):
        return
    cx, cy = np.cumsum(x)[:-1], np.cumsum(y)[:-1]
    k = int(np.argmax(cy - cx))
    raise MajorizationError(
        f"target is not majorized by source: partial sum {k + 1} of target "
        f"({cy[k]:.12g}) exceeds that of source ({cx[k]:.12g})"
    )


def _permutation_matrix(perm):
    P = np.zeros((len(perm), len(perm)))
    P[np.arange(len(perm)), perm] = 1.0
    return P


def _parity(perm):
    inversions = sum(perm[a] > perm[b] for a in range(len(perm)) for b in range(a + 1, len(perm)))
    return inversions % 2


def birkhoff_decompose(D, tol=1e-12):
    """Write a doubly stochastic matrix as a convex sum of permutation matrices.

    Greedy: repeatedly subtract the permutation whose smallest supported
    entry is largest (lexicographically first on ties).  For ``d = 3`` a
    decomposition using all six permutations is reduced to five terms via
    the identity sum(even permutations) = sum(odd permutations).

    Returns
    -------
    list of (weight, permutation matrix)
    """
    if not isinstance(D, DoublyStochasticMatrix):
        D = DoublyStochasticMatrix(D)
    d = D.dim
    if d > 3:
        raise PolarizationError("Birkhoff decomposition is implemented for d <= 3")
    R = np.array(D.entries)
    perms = list(itertools.permutations(range(d)))
    cols = np.array(perms)
    rows = np.arange(d)
    weights = {}
    remaining = 1.0
    while remaining > tol:
        bottleneck = R[rows, cols].min(axis=1)
        # argmax keeps the first maximum, i.e. the lexicographically smallest permutation
        k = int(np.argmax(bottleneck))
        val = float(bottleneck[k])
        if val <= tol:
            break
        R[rows, cols[k]] -= val
        weights[perms[k]] = weights.get(perms[k], 0.0) + val
        remaining -= val

    if d == 3 and len(weights) == 6:
        even = [p for p in weights if _parity(p) == 0]
        odd = [p for p in weights if _parity(p) == 1]
        side = even if min(weights[p] for p in even) <= min(weights[p] for p in odd) else odd
        other = odd if side is even else even
        c = min(weights[p] for p in side)
        for p in side:
            weights[p] -= c
        for p in other:
            weights[p] += c
        weights = {p: w for p, w in weights.items() if w > tol}

    total = sum(weights.values())
    return [(w / total, _permutation_matrix(p)) for p, w in sorted(weights.items())]


def synthesize_uhlmann(r, lam, tol=DEFAULT_TOL):
    """Random-unitary channel mapping ``diag(r)`` to ``diag(lam)``.

    The unitaries are permutation matrices, obtained from the Birkhoff
    decomposition of the T-transform chain.
    """
    D, _ = synthesize_doubly_stochastic(r, lam, tol)
    terms = birkhoff_decompose(D)
    return RandomUnitaryChannel([w for w, _ in terms], np.stack([P for _, P in terms]))


def sample_haar_unitary(dim, seed):
    """Haar-distributed unitary from a QR-orthonormalized complex Gaussian matrix."""
    check_dim(dim)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    diag = np.diag(R)
    return Q * (diag / np.abs(diag))


def random_unitary_channel(dim, n_terms, seed):
    """Channel with Haar unitaries and flat-Dirichlet weights."""
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(n_terms))
    unitaries = np.stack([sample_haar_unitary(dim, rng) for _ in range(n_terms)])
    return RandomUnitaryChannel(weights, unitaries)


def is_unital(channel, tol=UNITARY_TOL):
    """Check that the channel fixes the maximally mixed state."""
    d = channel.dim
    mixed = np.eye(d) / d
    return bool(np.max(np.abs(apply_random_unitary(channel, mixed) - mixed)) < tol)


def output_state(channel, rho, tol=DEFAULT_TOL):
    """Canonical state of ``channel(rho)``; ``rho`` may be a state or a matrix."""
    if isinstance(channel, MixingChannel):
        return apply_mixing(channel, rho)
    if isinstance(rho, PolarizationState):
        rho = rho.as_matrix()
    return canonical_state(apply_random_unitary(channel, rho), tol)
