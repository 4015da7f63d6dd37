"""Separability of bipartite Gaussian states.

A Gaussian state with covariance matrix ``V`` is separable across ``A|B``
iff there are physical covariance matrices ``g_A`` and ``g_B`` with
``V >= g_A (+) g_B``. Two decision procedures are provided:

``"sdp"``
    Solves ``min s  s.t.  V + s I >= g_A (+) g_B`` with both ``g`` physical.
    The optimum is zero exactly on separable states and strictly positive on
    entangled ones.
``"iterative"``
    The nonlinear Schur-complement map on the off-diagonal block, which
    either certifies entanglement (the local block stops being physical) or
    separability (the correlations fall below the local slack).
"""

from __future__ import annotations

import enum
import warnings

import numpy as np

from .gaussian import (
    PSD_TOL,
    Partition,
    _partition,
    _require_physical,
    as_cm,
    is_ppt,
    permute_modes,
    symplectic_form,
    williamson,
)


class Separability(enum.Enum):
    SEPARABLE = "separable"
    ENTANGLED = "entangled"
    UNDECIDED = "undecided"


SDP_TOL = 1e-7
UNDECIDED_FACTOR = 10.0


def _a_first(V, part):
    V = as_cm(V)
    part = _partition(part, V.n_modes)
    a = sorted(part.side_a)
    return permute_modes(V, a + sorted(part.side_b)).data, len(a)


def _local_normal_form(data, na):
    # Separability is invariant under local symplectic maps. Bringing each
    # reduced state to Williamson form keeps the SDP well conditioned even
    # for strongly squeezed inputs.
    k = 2 * na
    _, s_a = williamson(data[:k, :k])
    _, s_b = williamson(data[k:, k:])
    L = np.zeros_like(data)
    L[:k, :k] = np.linalg.inv(s_a)
    L[k:, k:] = np.linalg.inv(s_b)
    out = L @ data @ L.T
    return (out + out.T) / 2


def _physical_lmi(g, n):
    import cvxpy as cp

    half_om = symplectic_form(n) / 2
    # real embedding of the Hermitian matrix g + (i/2) Omega
    return cp.bmat([[g, -half_om], [half_om, g]]) >> 0


def separability_margin(V, part, max_iter=500, solver="CLARABEL", precondition=True):
    """Smallest isotropic noise ``s`` that makes ``V + s I`` separable.

    Returns ``(s, status)``, where ``status`` is the solver status string.
    ``s`` is (numerically) zero for separable states. With
    ``precondition`` the state is first brought to local Williamson form, so
    ``s`` refers to that representative rather than to ``V`` itself.
    """
    import cvxpy as cp

    data, na = _a_first(V, part)
    if precondition:
        data = _local_normal_form(data, na)
    n = data.shape[0] // 2
    nb = n - na
    g_a = cp.Variable((2 * na, 2 * na), symmetric=True)
    g_b = cp.Variable((2 * nb, 2 * nb), symmetric=True)
    s = cp.Variable()
    block = cp.bmat([[g_a, np.zeros((2 * na, 2 * nb))], [np.zeros((2 * nb, 2 * na)), g_b]])
    slack = data + s * np.eye(2 * n) - block
    constraints = [(slack + slack.T) / 2 >> 0, _physical_lmi(g_a, na), _physical_lmi(g_b, nb)]
    prob = cp.Problem(cp.Minimize(s), constraints)
    opts = {}
    if solver == "CLARABEL":
        opts = dict(max_iter=max_iter, tol_gap_abs=1e-11, tol_gap_rel=1e-11, tol_feas=1e-11)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            prob.solve(solver=solver, **opts)
        except cp.error.SolverError:
            return float("nan"), "solver_error"
    value = float(s.value) if s.value is not None else float("nan")
    return value, prob.status


def _iterative(data, na, tol, max_iter):
    # work in the vacuum = identity convention of the map
    g = 2 * data
    A, B, C = g[: 2 * na, : 2 * na], g[2 * na :, 2 * na :], g[: 2 * na, 2 * na :]
    om_a = symplectic_form(na)
    om_b = symplectic_form(B.shape[0] // 2)
    scale = max(1.0, np.abs(g).max())
    for _ in range(max_iter):
        if np.linalg.eigvalsh(A - 1j * om_a).min() < -tol * scale:
            return Separability.ENTANGLED
        slack = A - np.linalg.norm(C, 2) * np.eye(A.shape[0]) - 1j * om_a
        if np.linalg.eigvalsh(slack).min() >= -tol * scale:
            return Separability.SEPARABLE
        shifted = B - 1j * om_b
        if np.linalg.eigvalsh(shifted).min() <= tol * scale:
            return Separability.UNDECIDED
        X = C @ np.linalg.solve(shifted, C.T)
        A = A - X.real
        A = (A + A.T) / 2
        B, C, om_b = A, -X.imag, om_a
    return Separability.UNDECIDED


def classify_separability(V, part, tol: float = SDP_TOL, max_iter: int = 500, method: str = "sdp") -> Separability:
    """Decide whether a Gaussian state is separable across ``part``.

    States that fail the PPT test are reported entangled without further
    work. For the SDP method, margins ``s <= tol`` are separable,
    ``s >= 10 tol`` entangled, and the band in between is undecided, as is
    any run where the solver does not converge within ``max_iter``.
    """
    _require_physical(V)
    V = as_cm(V)
    part = _partition(part, V.n_modes)
    if not is_ppt(V, part, PSD_TOL):
        return Separability.ENTANGLED
    if method == "iterative":
        data, na = _a_first(V, part)
        return _iterative(data, na, 1e-7 if tol == SDP_TOL else tol, max_iter)
    if method != "sdp":
        raise ValueError(f"unknown separability method {method!r}")
    s, status = separability_margin(V, part, max_iter=max_iter)
    if status not in ("optimal", "optimal_inaccurate") or not np.isfinite(s):
        return Separability.UNDECIDED
    if s <= tol:
        return Separability.SEPARABLE
    if s >= UNDECIDED_FACTOR * tol:
        return Separability.ENTANGLED
    return Separability.UNDECIDED


def is_separable_gklc(V, part, tol: float = SDP_TOL, max_iter: int = 500) -> Separability:
    """Three-way separability verdict with the default (SDP) decision procedure."""
    return classify_separability(V, part, tol=tol, max_iter=max_iter)


def is_separable(V, part, **kw) -> bool:
    """Boolean shortcut; raises if the engine cannot decide."""
    verdict = classify_separability(V, part, **kw)
    if verdict is Separability.UNDECIDED:
        raise RuntimeError("separability undecided at this tolerance")
    return verdict is Separability.SEPARABLE


__all__ = ["Separability", "classify_separability", "is_separable", "is_separable_gklc", "separability_margin", "Partition"]
