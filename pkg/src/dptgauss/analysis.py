"""Entanglement properties of the transducer channels.

Squeezing-type operation (pumps of opposite detuning) is studied through the
two-mode state produced from vacuum inputs. Beamsplitter-type operation (both
pumps red) is studied through its Choi state, whose separability and PPT
boundaries give the channel regions, and through the one-mode converters
obtained by feeding vacuum into one port and discarding the other output.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateState, InvalidChannel, InvalidParams, NotPhaseInsensitive, PoleProximity
from .gaussian import (
    VACUUM,
    CovarianceMatrix,
    GaussianChannel,
    ModeKind,
    ModeLabel,
    Partition,
    apply_channel,
    direct_sum,
    loss_channel,
    one_mode_eb_check,
    pt_symplectic_eigenvalues,
    tmsv_cm,
    vacuum_cm,
)
from .model import BEAMSPLITTER, OE_MODES, POLE_GUARD, DptParams, PumpConfig, closed_form_channel
from .separability import Separability, classify_separability, separability_margin

DEFAULT_CHOI_R = 2.0

CHOI_MODES = (
    ModeLabel(0, ModeKind.ANCILLA, "A2"),
    ModeLabel(1, ModeKind.OPTICAL, "A1"),
    ModeLabel(2, ModeKind.MICROWAVE, "B1"),
    ModeLabel(3, ModeKind.ANCILLA, "B2"),
)
CHOI_PARTITION = Partition(frozenset({0, 1}), frozenset({2, 3}))
OE_PARTITION = Partition(frozenset({0}), frozenset({1}))


class Region(enum.Enum):
    SEPARABLE = "Separable"
    INSEPARABLE_PPT_PRESERVING = "InseparablePptPreserving"
    NON_PPT_PRESERVING = "NonPptPreserving"


class Direction(enum.Enum):
    UPCONVERT = "up"  # microwave in, optical out
    DOWNCONVERT = "down"  # optical in, microwave out

    @property
    def ports(self):
        """(input mode, output mode) indices."""
        return (1, 0) if self is Direction.UPCONVERT else (0, 1)


@dataclass(frozen=True)
class TmslsParams:
    """Two-mode squeezed state followed by independent losses.

    ``r_prime`` uses the convention where the squeezed pair has diagonal
    variance ``cosh(r_prime)/2``. ``roles`` names the ports carrying the
    ``i`` (blue-detuned) and ``j`` (red-detuned) transmissivities.
    """

    r_prime: float
    tau_prime_i: float
    tau_prime_j: float
    roles: tuple = ("a", "b")

    @property
    def cosh_r_prime(self):
        return math.cosh(self.r_prime)


@dataclass(frozen=True)
class ThresholdReport:
    nu_a: float
    nu_b: float

    @property
    def sep_threshold(self):
        return self.nu_a + self.nu_b

    @property
    def ppt_threshold(self):
        return max(self.nu_a, self.nu_b)


@dataclass(frozen=True)
class RegionReport:
    region: Region
    thresholds: ThresholdReport
    n_th: float
    margins: dict = field(default_factory=dict)


@dataclass(frozen=True)
class OneModeChannelParams:
    """Phase-insensitive one-mode channel: quadratures scaled by ``sqrt(tau_eff)``
    and ``noise_eff`` added to each output variance.

    For a phase-conjugating reduction (squeezing-type pumps) ``tau_eff`` is
    the gain and may exceed one.
    """

    direction: Direction
    tau_eff: float
    noise_eff: float
    conjugating: bool = False


# ---------------------------------------------------------------------------
# squeezing-type operation


def squeezer_roles(pump: PumpConfig):
    """Port names ``(i, j)``: ``i`` is blue detuned, ``j`` red detuned."""
    if not pump.is_squeezer:
        raise InvalidParams("squeezer analysis needs pumps of opposite detuning")
    return ("a", "b") if pump.sigma_a == 1 else ("b", "a")


def _side(d: DptParams, port):
    return dict(
        C=getattr(d, f"C_{port}"),
        tau=getattr(d, f"tau_{port}"),
        delta=getattr(d, f"delta_{port}"),
        eps=getattr(d, f"eps_{port}"),
    )


def _squeezer_sides(d, pump, pole_guard):
    i, j = squeezer_roles(pump)
    si, sj = _side(d, i), _side(d, j)
    den = 1 - si["C"] + sj["C"]
    if abs(den) <= pole_guard:
        raise PoleProximity(f"|1 - C_i + C_j| = {abs(den):.3g} is within the pole guard {pole_guard}")
    return si, sj, den


def squeezer_output(d: DptParams, pump: PumpConfig, pole_guard: float = POLE_GUARD) -> CovarianceMatrix:
    """Two-mode state emitted from vacuum inputs."""
    squeezer_roles(pump)
    ch = closed_form_channel(d, pump, pole_guard)
    return apply_channel(ch, vacuum_cm(2))


def squeezer_log_negativity(d: DptParams, pump: PumpConfig, pole_guard: float = POLE_GUARD) -> float:
    """Closed-form log-negativity of :func:`squeezer_output`."""
    si, sj, den = _squeezer_sides(d, pump, pole_guard)
    n = d.n_th

    def X(k):
        return si["C"] * si["eps"] * si["tau"] * (sj["C"] + n + 1) ** k + sj["C"] * sj["eps"] * sj["tau"] * (si["C"] + n) ** k

    return -math.log1p(4 * (X(1) - math.sqrt(X(0) * X(2))) / den**2)


def tmsls_params(d: DptParams, pump: PumpConfig, pole_guard: float = POLE_GUARD) -> TmslsParams:
    """Effective squeezing and transmissivities reproducing the squeezer output."""
    si, sj, _ = _squeezer_sides(d, pump, pole_guard)
    if si["C"] == 0 or sj["C"] == 0:
        raise DegenerateState("effective squeezed-lossy form needs nonzero cooperativities")
    n = d.n_th
    cosh_r = 8 * (si["C"] + n) * (sj["C"] + n + 1) / (si["C"] - sj["C"] - 1) ** 2 + 1
    return TmslsParams(
        r_prime=math.acosh(cosh_r),
        tau_prime_i=si["C"] * si["tau"] * si["eps"] / (si["C"] + n),
        tau_prime_j=sj["C"] * sj["tau"] * sj["eps"] / (sj["C"] + n + 1),
        roles=squeezer_roles(pump),
    )


def tmsls_cm(t: TmslsParams) -> CovarianceMatrix:
    """Covariance matrix of the squeezed-lossy circuit, modes ordered ``(a, b)``."""
    pair = tmsv_cm(t.r_prime / 2, phase=np.pi)
    taus = (t.tau_prime_i, t.tau_prime_j) if t.roles == ("a", "b") else (t.tau_prime_j, t.tau_prime_i)
    out = apply_channel(loss_channel(taus), pair)
    return CovarianceMatrix(out.data, OE_MODES)


# ---------------------------------------------------------------------------
# beamsplitter-type operation: Choi state and thresholds


def choi_cm(ch: GaussianChannel, r: float = DEFAULT_CHOI_R) -> CovarianceMatrix:
    """Four-mode Choi covariance matrix, modes ``(A2, A1, B1, B2)``.

    ``A1`` and ``B1`` each start half of a squeezed pair whose variance is
    ``cosh(r)/2``; the channel acts on ``A1`` and ``B1``.
    """
    if ch.n_in != 2 or ch.n_out != 2:
        raise InvalidChannel(f"Choi construction needs a two-mode channel, got {ch.n_in}->{ch.n_out}")
    if not r > 0:
        raise InvalidParams(f"Choi squeezing must be positive, got {r}")
    pair = tmsv_cm(r / 2).data
    V_in = direct_sum(pair, pair)
    T = direct_sum(np.eye(2), ch.T, np.eye(2))
    N = direct_sum(np.zeros((2, 2)), ch.N, np.zeros((2, 2)))
    return CovarianceMatrix(T @ V_in @ T.T + N, CHOI_MODES)


def _nu(C, tau, delta, eps):
    num = delta * tau * C
    if num == 0:
        return 0.0
    den = 1 - delta * eps * (1 - 2 * tau) ** 2
    return num / den if den > 0 else math.inf


def thresholds(d: DptParams) -> ThresholdReport:
    """Thermal-occupancy thresholds of the beamsplitter-type channel."""
    return ThresholdReport(
        nu_a=_nu(d.C_a, d.tau_a, d.delta_a, d.eps_a),
        nu_b=_nu(d.C_b, d.tau_b, d.delta_b, d.eps_b),
    )


def classify(d: DptParams) -> RegionReport:
    """Region of the beamsplitter-type channel for the device ``d``."""
    th = thresholds(d)
    n = d.n_th
    if n >= th.sep_threshold:
        region = Region.SEPARABLE
    elif n < th.ppt_threshold:
        region = Region.NON_PPT_PRESERVING
    else:
        region = Region.INSEPARABLE_PPT_PRESERVING
    margins = {
        "sep": n - th.sep_threshold,
        "ppt": n - th.ppt_threshold,
        "nu_a": n - th.nu_a,
        "nu_b": n - th.nu_b,
    }
    return RegionReport(region, th, n, margins)


def beamsplitter_choi(d: DptParams, r: float = DEFAULT_CHOI_R) -> CovarianceMatrix:
    return choi_cm(closed_form_channel(d, BEAMSPLITTER), r)


def choi_ppt_margin(d: DptParams, r: float = DEFAULT_CHOI_R) -> float:
    """Smallest partially transposed symplectic eigenvalue of the Choi state, minus 1/2."""
    return float(pt_symplectic_eigenvalues(beamsplitter_choi(d, r), CHOI_PARTITION)[0] - VACUUM)


def pt_deficiency_count(d: DptParams, r: float = DEFAULT_CHOI_R, tol: float = 1e-10) -> int:
    """Number of partially transposed symplectic eigenvalues below the vacuum value."""
    nu = pt_symplectic_eigenvalues(beamsplitter_choi(d, r), CHOI_PARTITION)
    return int(np.sum(nu < VACUUM - tol))


def choi_classification(d: DptParams, r: float = DEFAULT_CHOI_R, **sep_kw) -> Region:
    """Region decided numerically from the Choi state instead of the closed-form thresholds."""
    V = beamsplitter_choi(d, r)
    if pt_symplectic_eigenvalues(V, CHOI_PARTITION)[0] < VACUUM - 1e-10:
        return Region.NON_PPT_PRESERVING
    verdict = classify_separability(V, CHOI_PARTITION, **sep_kw)
    if verdict is Separability.UNDECIDED:
        raise RuntimeError(f"separability undecided at n_th={d.n_th}")
    return Region.SEPARABLE if verdict is Separability.SEPARABLE else Region.INSEPARABLE_PPT_PRESERVING


@dataclass(frozen=True)
class LocatedThreshold:
    """Numerically located boundary in ``n_th`` with its bracket."""

    value: float
    lo: float
    hi: float
    undecided: tuple = ()

    @property
    def precision(self):
        return (self.hi - self.lo) / 2


SEP_BRACKET = 5e-3
SEP_PROBES = (0.01, 0.03, 0.06)
SEP_SLACK = 0.05


def _upper_bracket(is_above, start, limit=1e6):
    hi = max(start, 1e-3)
    while not is_above(hi):
        hi *= 2
        if hi > limit:
            return None
    return hi


def verify_threshold_numerically(
    d: DptParams,
    r: float = DEFAULT_CHOI_R,
    which: str = "ppt",
    rtol: float = 1e-10,
    **sep_kw,
) -> LocatedThreshold:
    """Locate the PPT or separability boundary in ``n_th`` from the Choi state alone.

    The PPT boundary is the root of the smallest partially transposed
    symplectic eigenvalue minus 1/2. The separability boundary is bisected,
    starting from the PPT boundary, on
    the verdict of :func:`classify_separability` down to a relative bracket of
    ``SEP_BRACKET`` (undecided midpoints stop it early and are reported), and
    the estimate is then refined by extrapolating the square root of the SDP
    margin to zero from inside the entangled region.
    """
    if which == "ppt":
        return _locate_ppt(d, r, rtol)
    if which != "separability":
        raise ValueError(f"unknown threshold kind {which!r}")

    def verdict(n):
        V = beamsplitter_choi(d.replace(n_th=n), r)
        return classify_separability(V, CHOI_PARTITION, **sep_kw)

    # below the PPT boundary the Choi state is NPT and hence entangled, so
    # the separability boundary is searched above it
    floor = _locate_ppt(d, r, rtol).value
    if math.isinf(floor):
        return LocatedThreshold(math.inf, math.inf, math.inf)
    if verdict(floor) is Separability.SEPARABLE:
        return LocatedThreshold(floor, floor, floor)
    hi = _upper_bracket(lambda n: verdict(n) is Separability.SEPARABLE, 2 * max(floor, 1e-3))
    if hi is None:
        return LocatedThreshold(math.inf, math.inf, math.inf)
    lo = floor
    undecided = []
    while hi - lo > SEP_BRACKET * hi:
        mid = (lo + hi) / 2
        v = verdict(mid)
        if v is Separability.UNDECIDED:
            undecided.append(mid)
            break
        if v is Separability.SEPARABLE:
            hi = mid
        else:
            lo = mid
    # an undecided margin sits above the solver noise floor, so it is a
    # usable anchor for the probes even though it does not move ``lo``
    top = max([lo] + [u for u in undecided if u < hi])
    value = _extrapolate_margin(d, r, top, hi, floor)
    # an entangled verdict is reliable while a separable one only says the
    # margin is below tolerance, so only ``lo`` bounds the refined value
    if not (value >= lo and value <= hi + SEP_SLACK * hi):
        value = (lo + hi) / 2
    return LocatedThreshold(value, lo, max(hi, value), tuple(undecided))


def _locate_ppt(d, r, rtol):
    def margin(n):
        return choi_ppt_margin(d.replace(n_th=n), r)

    if margin(0.0) >= 0:
        return LocatedThreshold(0.0, 0.0, 0.0)
    hi = _upper_bracket(lambda n: margin(n) > 0, max(1.0, d.C_a + d.C_b))
    if hi is None:
        return LocatedThreshold(math.inf, math.inf, math.inf)
    root = brentq(margin, 0.0, hi, xtol=1e-14, rtol=max(rtol, 4 * np.finfo(float).eps), maxiter=200)
    return LocatedThreshold(root, root, root)


def _extrapolate_margin(d, r, lo, hi, floor):
    # Below the boundary the SDP margin grows quadratically in the distance
    # to it, so sqrt(margin) is smooth and nearly linear there. Probes well
    # inside the entangled region sit far above the solver noise floor, and a
    # quadratic through them pins the zero much more tightly than the verdict
    # bisection. The probes stay above the PPT boundary, where the margin
    # has a kink. Returns nan when the probes are unusable.
    span = min(max(SEP_PROBES) * hi, lo - floor)
    if not span > 0:
        return math.nan
    points = np.array([lo - span * f / max(SEP_PROBES) for f in SEP_PROBES])
    roots = []
    for n in points:
        s, status = separability_margin(beamsplitter_choi(d.replace(n_th=n), r), CHOI_PARTITION)
        if status not in ("optimal", "optimal_inaccurate") or not s > 0:
            return math.nan
        roots.append(math.sqrt(s))
    fit = np.polyfit(points - lo, roots, 2)
    cands = [z.real + lo for z in np.roots(fit) if abs(z.imag) < 1e-12 and z.real + lo > points[0]]
    return min(cands) if cands else math.nan


# ---------------------------------------------------------------------------
# one-mode converters


def reduce_one_mode(ch: GaussianChannel, direction: Direction, tol: float = 1e-9) -> OneModeChannelParams:
    """Converter obtained by feeding vacuum into the unused input and tracing the unused output."""
    if ch.n_in != 2 or ch.n_out != 2:
        raise InvalidChannel("one-mode reduction needs a two-mode channel")
    src, dst = direction.ports
    o, i = slice(2 * dst, 2 * dst + 2), slice(2 * src, 2 * src + 2)
    u = slice(2 * (1 - src), 2 * (1 - src) + 2)
    T_sig = ch.T[o, i]
    T_unused = ch.T[o, u]
    noise = T_unused @ T_unused.T * VACUUM + ch.N[o, o]
    gain_matrix = T_sig @ T_sig.T
    tau = abs(np.linalg.det(T_sig))
    scale = max(1.0, np.abs(noise).max(), tau)
    if np.abs(gain_matrix - tau * np.eye(2)).max() > tol * scale or abs(noise[0, 1]) > tol * scale or abs(noise[0, 0] - noise[1, 1]) > tol * scale:
        raise NotPhaseInsensitive(f"{direction.value}-conversion channel is phase sensitive")
    return OneModeChannelParams(direction, float(tau), float(np.trace(noise) / 2), bool(np.linalg.det(T_sig) < 0))


def converter_params(d: DptParams, pump: PumpConfig, direction: Direction) -> OneModeChannelParams:
    return reduce_one_mode(closed_form_channel(d, pump), direction)


def converter_is_eb(d: DptParams, pump: PumpConfig, direction: Direction, tol: float = 1e-10) -> bool:
    """Whether the one-mode converter is entanglement breaking."""
    p = converter_params(d, pump, direction)
    return one_mode_eb_check(p.tau_eff, p.noise_eff, tol=tol, conjugating=p.conjugating)


def converter_eb_margin(d: DptParams, pump: PumpConfig, direction: Direction) -> float:
    """``noise_eff - (1 + tau_eff)/2``; nonnegative exactly when entanglement breaking."""
    p = converter_params(d, pump, direction)
    return p.noise_eff - (1 + p.tau_eff) / 2


def eb_threshold(d: DptParams, direction: Direction) -> float:
    """Closed-form occupancy below which the beamsplitter-type converter is not entanglement breaking."""
    port = "b" if direction is Direction.UPCONVERT else "a"
    s = _side(d, port)
    return s["tau"] * s["delta"] * s["C"]


def converter_noise_closed_form(d: DptParams, direction: Direction) -> float:
    """Added output noise of the beamsplitter-type converter in closed form.

    The outer factor belongs to the output port and the subtracted term to
    the input port.
    """
    out, src = ("a", "b") if direction is Direction.UPCONVERT else ("b", "a")
    so, si = _side(d, out), _side(d, src)
    D = (1 + d.C_a + d.C_b) ** 2
    return 0.5 + 2 * so["eps"] * so["tau"] * so["C"] * (2 * d.n_th - si["delta"] * si["tau"] * si["C"]) / D


def converter_tau_closed_form(d: DptParams, direction: Direction) -> float:
    out, src = ("a", "b") if direction is Direction.UPCONVERT else ("b", "a")
    return 4 * getattr(d, f"delta_{src}") * getattr(d, f"eps_{out}") * d.tau_a * d.tau_b * d.C_a * d.C_b / (1 + d.C_a + d.C_b) ** 2


def locate_eb_threshold(d: DptParams, direction: Direction, pump: PumpConfig = BEAMSPLITTER) -> float:
    """Root in ``n_th`` of :func:`converter_eb_margin`; ``inf`` if never reached."""
    def margin(n):
        return converter_eb_margin(d.replace(n_th=n), pump, direction)

    if margin(0.0) >= 0:
        return 0.0
    hi = _upper_bracket(lambda n: margin(n) > 0, max(1.0, d.C_a + d.C_b))
    if hi is None:
        return math.inf
    return brentq(margin, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
