"""Cross-validation suites shared by the ``verify`` command and the test suite.

Every check returns a :class:`SuiteResult` recording the worst deviation seen
and the tolerance it was held to, so callers can print one line per suite.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .analysis import (
    CHOI_PARTITION,
    DEFAULT_CHOI_R,
    OE_PARTITION,
    Direction,
    Region,
    beamsplitter_choi,
    choi_classification,
    classify,
    converter_is_eb,
    converter_params,
    eb_threshold,
    locate_eb_threshold,
    squeezer_log_negativity,
    squeezer_output,
    thresholds,
    tmsls_cm,
    tmsls_params,
    verify_threshold_numerically,
)
from .gaussian import is_ppt, log_negativity
from .model import (
    BEAMSPLITTER,
    PUMPS,
    DptParams,
    PumpConfig,
    closed_form_channel,
    embedded_numeric_channel,
)
from .separability import Separability, classify_separability

CHANNEL_TOL_EMBEDDED = 1e-4
CHANNEL_TOL_RWA = 1e-9
PPT_RTOL = 1e-6
SEP_RTOL = 1e-3
EN_TOL = 1e-9
TMSLS_TOL = 1e-9
EB_TOL = 1e-9
MIN_NOISE_TOL = 1e-12
CHOI_RS = (0.5, 1.0, 2.0, 3.0, 5.0)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    worst: float
    tol: float
    detail: str = ""
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name}: worst={self.worst:.3e} tol={self.tol:.1e} ({self.seconds:.2f} s)"
        return f"{text} {self.detail}" if self.detail else text


def _result(name, worst, tol, t0, detail="", extra_ok=True):
    passed = bool(extra_ok and np.isfinite(worst) and worst <= tol)
    return SuiteResult(name, passed, float(worst), tol, detail, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# parameter draws


def draw_params(
    rng,
    pump: PumpConfig = BEAMSPLITTER,
    lossy: bool = True,
    c_range=(0.05, 3.0),
    n_range=(0.0, 3.0),
    guard: float = 0.1,
) -> DptParams:
    """Random device parameters on the stable side of the pole.

    ``guard`` bounds ``1 - s_a C_a - s_b C_b`` from below, which keeps the
    squeezing-type draws away from the parametric instability.
    """
    while True:
        C_a, C_b = rng.uniform(*c_range, size=2)
        if 1 - pump.sigma_a * C_a - pump.sigma_b * C_b >= guard:
            break
    tau_a, tau_b = rng.uniform(0.01, 1.0, size=2)
    losses = rng.uniform(0.1, 1.0, size=4) if lossy else np.ones(4)
    return DptParams(float(C_a), float(C_b), float(tau_a), float(tau_b), float(rng.uniform(*n_range)), *map(float, losses))


def tau_c_grid(n_tau, n_c, tau=(0.05, 0.95), C=(0.1, 5.0), n_th=0.0):
    """Symmetric lossless devices (``tau_a = tau_b``, ``C_a = C_b``) on a regular grid."""
    return [
        DptParams(float(c), float(c), float(t), float(t), n_th)
        for t in np.linspace(*tau, n_tau)
        for c in np.linspace(*C, n_c)
    ]


# ---------------------------------------------------------------------------
# suites


def check_channels(points_by_pump, perturb_N: float = 0.0):
    """Closed forms against both numeric transfer-function paths.

    ``perturb_N`` adds a multiple of the identity to the closed-form noise
    matrix, which is a deliberate fault for exercising the harness.
    """
    t0 = time.perf_counter()
    worst_full = worst_rwa = 0.0
    where_full = where_rwa = None
    for pump, points in points_by_pump.items():
        for d in points:
            ref = closed_form_channel(d, pump)
            N_ref = ref.N + perturb_N * np.eye(4)
            for rwa in (True, False):
                ch = embedded_numeric_channel(d, pump, rotating_wave=rwa)
                dev = max(np.abs(ch.T - ref.T).max(), np.abs(ch.N - N_ref).max())
                if rwa and dev > worst_rwa:
                    worst_rwa, where_rwa = dev, (pump, d)
                if not rwa and dev > worst_full:
                    worst_full, where_full = dev, (pump, d)
    n = sum(len(p) for p in points_by_pump.values())
    rwa = _result("channel_rwa", worst_rwa, CHANNEL_TOL_RWA, t0, f"draws={n}")
    full = _result("channel_embedded", worst_full, CHANNEL_TOL_EMBEDDED, t0, f"draws={n}")
    if not rwa.passed and where_rwa is not None:
        rwa = _with_detail(rwa, f"at {where_rwa}")
    if not full.passed and where_full is not None:
        full = _with_detail(full, f"at {where_full}")
    return rwa, full


def _with_detail(res, extra):
    return SuiteResult(res.name, res.passed, res.worst, res.tol, f"{res.detail} {extra}".strip(), res.seconds)


def _rel(a, b):
    if math.isinf(a) and math.isinf(b):
        return 0.0
    return abs(a - b) / max(abs(b), 1e-300)


def check_ppt_thresholds(points, r: float = DEFAULT_CHOI_R, rtol: float = PPT_RTOL):
    """Root of the Choi PPT margin against ``max(nu_a, nu_b)``."""
    t0 = time.perf_counter()
    worst = 0.0
    for d in points:
        got = verify_threshold_numerically(d, r, which="ppt").value
        worst = max(worst, _rel(got, thresholds(d).ppt_threshold))
    return _result("ppt_threshold", worst, rtol, t0, f"points={len(points)}")


def check_sep_thresholds(points, r: float = DEFAULT_CHOI_R, rtol: float = SEP_RTOL, band_ratio: float = 0.2):
    """Separability boundary located from the SDP against ``nu_a + nu_b``.

    The bound-entangled band is checked at the midpoint between the two
    closed-form thresholds whenever it is at least ``band_ratio`` of the
    larger threshold wide; narrower bands sit inside the solver tolerance.
    """
    t0 = time.perf_counter()
    worst = 0.0
    band_fail = []
    checked = 0
    for d in points:
        th = thresholds(d)
        got = verify_threshold_numerically(d, r, which="separability")
        worst = max(worst, _rel(got.value, th.sep_threshold))
        if min(th.nu_a, th.nu_b) >= band_ratio * th.ppt_threshold:
            checked += 1
            mid = d.replace(n_th=(th.ppt_threshold + th.sep_threshold) / 2)
            V = beamsplitter_choi(mid, r)
            if not is_ppt(V, CHOI_PARTITION) or classify_separability(V, CHOI_PARTITION) is not Separability.ENTANGLED:
                band_fail.append(d)
    detail = f"points={len(points)} band_checked={checked} band_failures={len(band_fail)}"
    return _result("separability_threshold", worst, rtol, t0, detail, extra_ok=not band_fail)


def check_squeezer_en(points_by_pump, tol: float = EN_TOL):
    """Closed-form log-negativity against the numeric one, and positivity."""
    t0 = time.perf_counter()
    worst = 0.0
    nonpositive = 0
    for pump, points in points_by_pump.items():
        for d in points:
            closed = squeezer_log_negativity(d, pump)
            numeric = log_negativity(squeezer_output(d, pump), OE_PARTITION)
            worst = max(worst, abs(closed - numeric))
            if d.C_a > 0 and d.C_b > 0 and not numeric > 0:
                nonpositive += 1
    n = sum(len(p) for p in points_by_pump.values())
    return _result("squeezer_log_negativity", worst, tol, t0, f"draws={n} nonpositive={nonpositive}", extra_ok=nonpositive == 0)


def check_tmsls(points_by_pump, tol: float = TMSLS_TOL):
    """Squeezed-pair-plus-loss circuit against the squeezer output state."""
    t0 = time.perf_counter()
    worst = 0.0
    for pump, points in points_by_pump.items():
        for d in points:
            rebuilt = tmsls_cm(tmsls_params(d, pump)).data
            worst = max(worst, np.abs(rebuilt - squeezer_output(d, pump).data).max())
    n = sum(len(p) for p in points_by_pump.values())
    return _result("tmsls_reconstruction", worst, tol, t0, f"draws={n}")


def check_eb_thresholds(points, eps_values=(0.1, 0.4, 0.7, 1.0), tol: float = EB_TOL):
    """Root-found EB crossings against the closed forms, across output losses."""
    t0 = time.perf_counter()
    worst = 0.0
    for d in points:
        for direction in Direction:
            expected = eb_threshold(d, direction)
            for eps in eps_values:
                got = locate_eb_threshold(d.replace(eps_a=eps, eps_b=eps), direction)
                worst = max(worst, abs(got - expected) / max(1.0, expected))
    return _result("eb_threshold", worst, tol, t0, f"points={len(points)} eps={list(eps_values)}")


def check_squeezer_eb(points_by_pump):
    t0 = time.perf_counter()
    failures = 0
    for pump, points in points_by_pump.items():
        for d in points:
            failures += sum(not converter_is_eb(d, pump, direction) for direction in Direction)
    n = sum(len(p) for p in points_by_pump.values())
    return _result("squeezer_converters_eb", float(failures), 0.0, t0, f"draws={n} not_eb={failures}")


def check_minimal_noise(points, tol: float = MIN_NOISE_TOL):
    """``noise_eff = (1 - tau_eff)/2`` for a lossless, cold, fully overcoupled device."""
    t0 = time.perf_counter()
    worst = 0.0
    for d in points:
        d = DptParams(d.C_a, d.C_b, 1.0, 1.0, 0.0)
        for direction in Direction:
            p = converter_params(d, BEAMSPLITTER, direction)
            worst = max(worst, abs(p.noise_eff - (1 - p.tau_eff) / 2))
    return _result("minimal_noise_identity", worst, tol, t0, f"points={len(points)}")


def check_region_ordering(points, r: float = DEFAULT_CHOI_R):
    """not EB  =>  NonPptPreserving  =>  not Separable.

    The EB and PPT verdicts come from the numeric reduction and the Choi
    state; the region comes from the closed-form thresholds.
    """
    t0 = time.perf_counter()
    violations = 0
    counts = {"not_eb": 0, "npt": 0}
    for d in points:
        not_eb = not (converter_is_eb(d, BEAMSPLITTER, Direction.UPCONVERT) and converter_is_eb(d, BEAMSPLITTER, Direction.DOWNCONVERT))
        npt = not is_ppt(beamsplitter_choi(d, r), CHOI_PARTITION)
        region = classify(d).region
        counts["not_eb"] += not_eb
        counts["npt"] += npt
        if not_eb and not npt:
            violations += 1
        if npt and region is not Region.NON_PPT_PRESERVING:
            violations += 1
        if not_eb and region is Region.SEPARABLE:
            violations += 1
    detail = f"points={len(points)} not_eb={counts['not_eb']} npt={counts['npt']} violations={violations}"
    return _result("region_ordering", float(violations), 0.0, t0, detail)


def region_probe_points(base_points):
    """Three occupancies per device, one well inside each region."""
    out = []
    for d in base_points:
        th = thresholds(d)
        for n in (0.5 * th.ppt_threshold, (th.ppt_threshold + th.sep_threshold) / 2, 1.5 * th.sep_threshold):
            out.append(d.replace(n_th=n))
    return out


def check_r_independence(points, rs=CHOI_RS):
    """Numeric Choi classification agrees across squeezing strengths and with the closed forms."""
    t0 = time.perf_counter()
    mismatches = 0
    for d in points:
        expected = classify(d).region
        for r in rs:
            try:
                got = choi_classification(d, r)
            except RuntimeError:
                got = None
            mismatches += got is not expected
    return _result("choi_r_independence", float(mismatches), 0.0, t0, f"points={len(points)} r={list(rs)} mismatches={mismatches}")


def symmetric_expected(tau):
    """Symmetric lossless thresholds in quantum cooperativity ``C/n_th``."""
    if tau >= 1:
        return {"sep": 0.0, "ppt": 0.0, "up_eb": 1.0, "down_eb": 1.0}
    return {"sep": 2 * (1 - tau), "ppt": 4 * (1 - tau), "up_eb": 1 / tau, "down_eb": 1 / tau}


def check_symmetric_curves(rows, tol: float = 1e-6):
    """Sweep rows (``swept``, ``sep``, ``ppt``, ``up_eb``, ``down_eb``) against the analytic curves.

    Also requires the one-mode and PPT curves to meet only at ``tau = 1/2``
    with quantum cooperativity 2.
    """
    t0 = time.perf_counter()
    worst = 0.0
    for row in rows:
        exp = symmetric_expected(row["swept"])
        for key, value in exp.items():
            worst = max(worst, abs(row[key] - value) / max(1.0, abs(value)))
    gaps = [(row["up_eb"] - row["ppt"], row["swept"], row["ppt"]) for row in rows]
    gap, tau_star, ppt_star = min(gaps, key=lambda g: abs(g[0]))
    meets = abs(gap) <= tol and abs(tau_star - 0.5) <= 1e-12 and abs(ppt_star - 2) <= tol
    ordered = all(g[0] >= -tol for g in gaps)
    detail = f"rows={len(rows)} touch at tau={tau_star:.6g} C/n_th={ppt_star:.9g}"
    return _result("symmetric_curves", worst, tol, t0, detail, extra_ok=meets and ordered)


# ---------------------------------------------------------------------------
# command-line driver


def _draws_by_pump(rng, n, pumps=PUMPS, **kw):
    return {pump: [draw_params(rng, pump, **kw) for _ in range(n)] for pump in pumps}


def run_all(seed: int = 42, draws: int = 1000, perturb_N: float = 0.0, r: float = DEFAULT_CHOI_R):
    """Run every suite on seeded random draws and return the results in order.

    The Choi-based suites are costlier than the channel checks, so they use
    ``draws // 10`` (PPT, ordering) or ``draws // 40`` (separability,
    squeezing-strength independence) points and are skipped when that is zero.
    """
    if draws < 1:
        raise ValueError("draws must be at least 1")
    rng = np.random.default_rng(seed)
    results = list(check_channels(_draws_by_pump(rng, draws), perturb_N))
    squeezers = [p for p in PUMPS if p.is_squeezer]
    sq = _draws_by_pump(rng, draws, squeezers)
    results.append(check_squeezer_en(sq))
    results.append(check_tmsls(sq))
    results.append(check_squeezer_eb(sq))
    bs = [draw_params(rng) for _ in range(draws)]
    results.append(check_eb_thresholds(bs[: max(1, draws // 10)]))
    results.append(check_minimal_noise(bs))
    results.append(check_ppt_thresholds(bs[: max(1, draws // 10)], r))
    results.append(check_region_ordering(bs[: max(1, draws // 10)], r))
    n_sep = draws // 40
    if n_sep:
        sym = [draw_params(rng, c_range=(0.2, 3.0)) for _ in range(n_sep)]
        results.append(check_sep_thresholds(sym, r))
        grid = tau_c_grid(2, 2, tau=(0.2, 0.8), C=(0.5, 3.0))[:n_sep]
        results.append(check_r_independence(region_probe_points(grid)))
    return results
