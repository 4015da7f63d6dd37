"""Gaussian states and channels in the quadrature picture.

Conventions used throughout the package:

* quadratures are interleaved per mode, ``(x0, p0, x1, p1, ...)``;
* the vacuum has variance 1/2 in every quadrature;
* the symplectic form is the unit-normalized direct sum of ``[[0, 1], [-1, 0]]``
  blocks, so the uncertainty principle reads ``V + (i/2) Omega >= 0``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import schur

from .errors import (
    InvalidChannel,
    InvalidDimension,
    InvalidMatrix,
    InvalidPartition,
    InvalidState,
)

PSD_TOL = 1e-10
VACUUM = 0.5


class ModeKind(enum.Enum):
    OPTICAL = "optical"
    MICROWAVE = "microwave"
    MEDIATOR = "mediator"
    ANCILLA = "ancilla"
    ENVIRONMENT = "environment"


@dataclass(frozen=True)
class ModeLabel:
    index: int
    kind: ModeKind = ModeKind.ANCILLA
    name: str = ""

    def __post_init__(self):
        if self.index < 0:
            raise InvalidDimension(f"mode index must be nonnegative, got {self.index}")

    def with_index(self, index):
        return ModeLabel(index, self.kind, self.name)


def default_modes(n, kind=ModeKind.ANCILLA):
    return tuple(ModeLabel(k, kind) for k in range(n))


def _check_modes(modes, n):
    modes = tuple(modes)
    if len(modes) != n:
        raise InvalidDimension(f"{len(modes)} mode labels for {n} modes")
    if [m.index for m in modes] != list(range(n)):
        raise InvalidDimension("mode indices must be unique and contiguous from 0")
    return modes


@dataclass(frozen=True)
class CovarianceMatrix:
    """Second moments of an ``n``-mode Gaussian state.

    The stored matrix is symmetrized on construction and made read-only.
    """

    data: np.ndarray
    modes: tuple = field(default=None)

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise InvalidDimension(f"covariance matrix must be square, got {data.shape}")
        if data.shape[0] == 0 or data.shape[0] % 2:
            raise InvalidDimension(f"covariance matrix needs even dimension, got {data.shape[0]}")
        if not np.all(np.isfinite(data)):
            raise InvalidMatrix("covariance matrix has non-finite entries")
        scale = max(1.0, np.abs(data).max())
        if np.abs(data - data.T).max() > 1e-8 * scale:
            raise InvalidMatrix("covariance matrix is not symmetric")
        data = (data + data.T) / 2
        data.setflags(write=False)
        n = data.shape[0] // 2
        modes = default_modes(n) if self.modes is None else _check_modes(self.modes, n)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "modes", modes)

    @property
    def n_modes(self):
        return self.data.shape[0] // 2

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)


def as_cm(V, modes=None) -> CovarianceMatrix:
    if isinstance(V, CovarianceMatrix):
        return V
    return CovarianceMatrix(V, modes)


@dataclass(frozen=True)
class Partition:
    """Bipartition of mode indices into an A side and a B side."""

    side_a: frozenset
    side_b: frozenset

    def __post_init__(self):
        a, b = frozenset(self.side_a), frozenset(self.side_b)
        if a & b:
            raise InvalidPartition(f"sides overlap on modes {sorted(a & b)}")
        object.__setattr__(self, "side_a", a)
        object.__setattr__(self, "side_b", b)

    @classmethod
    def split(cls, side_a: Iterable[int], n: int) -> "Partition":
        """Partition with ``side_a`` and its complement in ``range(n)``."""
        a = frozenset(side_a)
        return cls(a, frozenset(range(n)) - a)

    def validate(self, n):
        if (self.side_a | self.side_b) != frozenset(range(n)):
            raise InvalidPartition(f"partition does not cover modes 0..{n - 1}")
        if not self.side_a or not self.side_b:
            raise InvalidPartition("both sides of a partition must be nonempty")
        return self


@dataclass(frozen=True)
class GaussianChannel:
    """Gaussian channel acting as ``V -> T V T^T + N``."""

    T: np.ndarray
    N: np.ndarray
    in_modes: tuple = None
    out_modes: tuple = None

    def __post_init__(self):
        T = np.array(self.T, dtype=float)
        N = np.array(self.N, dtype=float)
        if T.ndim != 2 or T.shape[0] % 2 or T.shape[1] % 2 or 0 in T.shape:
            raise InvalidDimension(f"bad transfer matrix shape {T.shape}")
        if N.shape != (T.shape[0], T.shape[0]):
            raise InvalidDimension(f"noise matrix shape {N.shape} does not match T {T.shape}")
        if not (np.all(np.isfinite(T)) and np.all(np.isfinite(N))):
            raise InvalidMatrix("channel has non-finite entries")
        if np.abs(N - N.T).max() > 1e-8 * max(1.0, np.abs(N).max()):
            raise InvalidMatrix("noise matrix is not symmetric")
        N = (N + N.T) / 2
        T.setflags(write=False)
        N.setflags(write=False)
        n_out, n_in = T.shape[0] // 2, T.shape[1] // 2
        in_modes = default_modes(n_in) if self.in_modes is None else _check_modes(self.in_modes, n_in)
        out_modes = default_modes(n_out) if self.out_modes is None else _check_modes(self.out_modes, n_out)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "in_modes", in_modes)
        object.__setattr__(self, "out_modes", out_modes)

    @property
    def n_in(self):
        return self.T.shape[1] // 2

    @property
    def n_out(self):
        return self.T.shape[0] // 2


# ---------------------------------------------------------------------------
# symplectic structure


def symplectic_form(n: int) -> np.ndarray:
    """Return the ``2n x 2n`` symplectic form for ``n`` interleaved modes."""
    if n < 1:
        raise InvalidDimension(f"need at least one mode, got n={n}")
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_eigenvalues(V) -> np.ndarray:
    """Symplectic eigenvalues of ``V``, sorted ascending.

    These are the moduli of the eigenvalues of ``i Omega V``; each modulus
    appears twice and one representative per pair is returned.
    """
    data = V.data if isinstance(V, CovarianceMatrix) else np.asarray(V, dtype=float)
    if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] % 2:
        raise InvalidDimension(f"symplectic eigenvalues need an even square matrix, got {data.shape}")
    if not np.all(np.isfinite(data)):
        raise InvalidMatrix("matrix has non-finite entries")
    n = data.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ data))
    return np.sort(ev)[::2]


def is_physical_cm(V, tol: float = PSD_TOL) -> bool:
    """True iff ``V`` satisfies the uncertainty principle to within ``tol``."""
    data = as_cm(V).data
    if np.linalg.eigvalsh(data).min() <= 0:
        return False
    return bool(symplectic_eigenvalues(data)[0] >= VACUUM - tol)


def williamson(V):
    """Williamson decomposition ``V = S diag(d, d) S^T`` with ``S`` symplectic.

    Returns ``(d, S)`` with ``d`` the symplectic eigenvalues in mode order.
    ``V`` must be positive definite.
    """
    data = as_cm(V).data
    w, U = np.linalg.eigh(data)
    if w.min() <= 0:
        raise InvalidMatrix("Williamson decomposition needs a positive definite matrix")
    root = (U * np.sqrt(w)) @ U.T
    inv_root = (U / np.sqrt(w)) @ U.T
    n = data.shape[0] // 2
    K, Z = schur(inv_root @ symplectic_form(n) @ inv_root, output="real")
    lam = np.empty(n)
    for k in range(n):
        if K[2 * k, 2 * k + 1] < 0:
            Z[:, [2 * k, 2 * k + 1]] = Z[:, [2 * k + 1, 2 * k]]
        lam[k] = abs(K[2 * k, 2 * k + 1])
    d = 1 / lam
    S = root @ Z / np.sqrt(np.repeat(d, 2))
    return d, S


def is_symplectic(S, tol=1e-9) -> bool:
    S = np.asarray(S, dtype=float)
    om = symplectic_form(S.shape[0] // 2)
    return bool(np.abs(S @ om @ S.T - om).max() <= tol)


def beamsplitter_symplectic(theta, i, j, n):
    """Real symplectic matrix mixing modes ``i`` and ``j`` with angle ``theta``."""
    S = np.eye(2 * n)
    c, s = np.cos(theta), np.sin(theta)
    for q in range(2):
        a, b = 2 * i + q, 2 * j + q
        S[a, a], S[a, b], S[b, a], S[b, b] = c, s, -s, c
    return S


def squeezer_symplectic(r, i, n):
    S = np.eye(2 * n)
    S[2 * i, 2 * i] = np.exp(-r)
    S[2 * i + 1, 2 * i + 1] = np.exp(r)
    return S


def phase_symplectic(phi, i, n):
    S = np.eye(2 * n)
    c, s = np.cos(phi), np.sin(phi)
    S[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = [[c, s], [-s, c]]
    return S


def random_symplectic(n, rng, depth=None, max_squeeze=1.0):
    """Random symplectic matrix built from a word of beamsplitters, squeezers and phases."""
    S = np.eye(2 * n)
    for _ in range(depth or 4 * n):
        k = rng.integers(3)
        i = int(rng.integers(n))
        if k == 0 and n > 1:
            j = int(rng.integers(n - 1))
            j += j >= i
            G = beamsplitter_symplectic(rng.uniform(0, 2 * np.pi), i, j, n)
        elif k == 1:
            G = squeezer_symplectic(rng.uniform(-max_squeeze, max_squeeze), i, n)
        else:
            G = phase_symplectic(rng.uniform(0, 2 * np.pi), i, n)
        S = G @ S
    return S


# ---------------------------------------------------------------------------
# standard states


def vacuum_cm(n=1, kind=ModeKind.ANCILLA) -> CovarianceMatrix:
    return CovarianceMatrix(np.eye(2 * n) * VACUUM, default_modes(n, kind))


def thermal_cm(nbar, kind=ModeKind.ANCILLA) -> CovarianceMatrix:
    nbar = np.atleast_1d(np.asarray(nbar, dtype=float))
    return CovarianceMatrix(np.diag(np.repeat(nbar + VACUUM, 2)), default_modes(len(nbar), kind))


def tmsv_cm(r, phase=0.0) -> CovarianceMatrix:
    """Two-mode squeezed vacuum with squeezing ``r`` (diagonal ``cosh(2r)/2``).

    ``phase`` rotates the correlation block; ``phase = pi`` gives anti-correlated
    ``x`` quadratures and correlated ``p`` quadratures.
    """
    c, s = np.cosh(2 * r) / 2, np.sinh(2 * r) / 2
    R = np.array([[np.cos(phase), np.sin(phase)], [np.sin(phase), -np.cos(phase)]])
    return CovarianceMatrix(np.block([[c * np.eye(2), s * R], [s * R, c * np.eye(2)]]))


# ---------------------------------------------------------------------------
# composition of modes


def direct_sum(*blocks):
    size = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((size, cols))
    i = j = 0
    for b in blocks:
        out[i : i + b.shape[0], j : j + b.shape[1]] = b
        i += b.shape[0]
        j += b.shape[1]
    return out


def tensor_cm(*states) -> CovarianceMatrix:
    """Covariance matrix of a product state; modes are relabeled in order."""
    states = [as_cm(V) for V in states]
    modes, k = [], 0
    for V in states:
        for m in V.modes:
            modes.append(m.with_index(k))
            k += 1
    return CovarianceMatrix(direct_sum(*(V.data for V in states)), modes)


def quadrature_indices(modes: Sequence[int]):
    return [2 * m + q for m in modes for q in (0, 1)]


def partial_trace(V, keep) -> CovarianceMatrix:
    """Reduced state on the modes in ``keep`` (kept in ascending order)."""
    V = as_cm(V)
    keep = sorted(set(keep))
    if not keep or keep[0] < 0 or keep[-1] >= V.n_modes:
        raise InvalidPartition(f"cannot keep modes {keep} of a {V.n_modes}-mode state")
    idx = quadrature_indices(keep)
    modes = [V.modes[m].with_index(k) for k, m in enumerate(keep)]
    return CovarianceMatrix(V.data[np.ix_(idx, idx)], modes)


def permute_modes(V, order) -> CovarianceMatrix:
    V = as_cm(V)
    order = list(order)
    if sorted(order) != list(range(V.n_modes)):
        raise InvalidPartition(f"{order} is not a permutation of the modes")
    idx = quadrature_indices(order)
    modes = [V.modes[m].with_index(k) for k, m in enumerate(order)]
    return CovarianceMatrix(V.data[np.ix_(idx, idx)], modes)


# ---------------------------------------------------------------------------
# channels


def identity_channel(n=1) -> GaussianChannel:
    return GaussianChannel(np.eye(2 * n), np.zeros((2 * n, 2 * n)))


def loss_channel(taus) -> GaussianChannel:
    """Independent pure-loss channels, one transmissivity per mode."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if np.any(taus < 0) or np.any(taus > 1):
        raise InvalidChannel(f"transmissivities must lie in [0, 1], got {taus}")
    t = np.repeat(taus, 2)
    return GaussianChannel(np.diag(np.sqrt(t)), np.diag((1 - t) * VACUUM))


def compose(*channels) -> GaussianChannel:
    """Sequential composition; the first argument acts first."""
    T, N = channels[0].T, channels[0].N
    for ch in channels[1:]:
        if ch.n_in * 2 != T.shape[0]:
            raise InvalidDimension("channel output/input mode counts do not match")
        T, N = ch.T @ T, ch.T @ N @ ch.T.T + ch.N
    return GaussianChannel(T, N, channels[0].in_modes, channels[-1].out_modes)


def tensor_channels(*channels) -> GaussianChannel:
    return GaussianChannel(direct_sum(*(c.T for c in channels)), direct_sum(*(c.N for c in channels)))


def apply_channel(ch: GaussianChannel, V) -> CovarianceMatrix:
    """Output covariance matrix ``T V T^T + N``."""
    V = as_cm(V)
    if ch.T.shape[1] != V.data.shape[0]:
        raise InvalidDimension(f"channel takes {ch.n_in} modes, state has {V.n_modes}")
    return CovarianceMatrix(ch.T @ V.data @ ch.T.T + ch.N, ch.out_modes)


def cp_matrix(ch: GaussianChannel) -> np.ndarray:
    """Hermitian matrix ``N + (i/2)(Omega_out - T Omega_in T^T)``."""
    om_in, om_out = symplectic_form(ch.n_in), symplectic_form(ch.n_out)
    return ch.N + 0.5j * (om_out - ch.T @ om_in @ ch.T.T)


def channel_is_cp(ch: GaussianChannel, tol: float = PSD_TOL) -> bool:
    return bool(np.linalg.eigvalsh(cp_matrix(ch)).min() >= -tol)


# ---------------------------------------------------------------------------
# entanglement


def _partition(part, n):
    if not isinstance(part, Partition):
        part = Partition.split(part, n)
    return part.validate(n)


def partial_transpose(V, part) -> CovarianceMatrix:
    """Flip the momentum quadrature of every mode on the A side of ``part``."""
    V = as_cm(V)
    part = _partition(part, V.n_modes)
    d = np.ones(2 * V.n_modes)
    for m in part.side_a:
        d[2 * m + 1] = -1.0
    return CovarianceMatrix(d[:, None] * V.data * d[None, :], V.modes)


def _require_physical(V, tol=1e-9):
    if not is_physical_cm(V, tol):
        raise InvalidState("covariance matrix is not physical")


def pt_symplectic_eigenvalues(V, part) -> np.ndarray:
    return symplectic_eigenvalues(partial_transpose(V, part))


def is_ppt(V, part, tol: float = PSD_TOL) -> bool:
    """Positive-partial-transpose test across ``part``."""
    _require_physical(V)
    return bool(pt_symplectic_eigenvalues(V, part)[0] >= VACUUM - tol)


def log_negativity(V, part) -> float:
    """Logarithmic negativity across ``part`` (natural log)."""
    _require_physical(V)
    nu = pt_symplectic_eigenvalues(V, part)
    nu = nu[nu < VACUUM]
    return float(-np.sum(np.log(2 * nu)))


def one_mode_eb_check(tau_eff: float, noise_eff: float, tol: float = PSD_TOL, conjugating: bool = False) -> bool:
    """Entanglement-breaking test for a phase-insensitive one-mode channel.

    The channel scales the quadratures by ``sqrt(tau_eff)`` (with a momentum
    sign flip when ``conjugating``) and adds ``noise_eff`` to each quadrature
    variance. It is entanglement breaking iff ``noise_eff >= (1 + tau_eff)/2``.
    For a conjugating channel complete positivity already forces this.
    """
    if tau_eff < 0 or (not conjugating and tau_eff > 1):
        raise InvalidChannel(f"effective transmissivity {tau_eff} out of range")
    cp_bound = (1 + tau_eff) / 2 if conjugating else (1 - tau_eff) / 2
    if noise_eff < cp_bound - tol:
        raise InvalidChannel(f"added noise {noise_eff} violates the CP bound {cp_bound}")
    return bool(noise_eff >= (1 + tau_eff) / 2 - tol)
