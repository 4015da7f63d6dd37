"""Acceptance criteria 1-9, each at its stated tolerance.

Every criterion prints one PASS/FAIL line; the lines are also repeated in the
pytest terminal summary (see ``conftest.py``) so they show up without ``-s``.
"""

import math
import time

import numpy as np
import pytest

from dptgauss.analysis import (
    squeezer_log_negativity,
    tmsls_params,
    verify_threshold_numerically,
)
from dptgauss.model import BEAMSPLITTER, PUMPS, DptParams
from dptgauss.sweep import SweepSpec, read_csv, rows_to_csv, run_sweep
from dptgauss.verify import (
    check_channels,
    check_eb_thresholds,
    check_symmetric_curves,
    check_minimal_noise,
    check_ppt_thresholds,
    check_r_independence,
    check_region_ordering,
    check_sep_thresholds,
    check_squeezer_eb,
    check_squeezer_en,
    check_tmsls,
    draw_params,
    region_probe_points,
    tau_c_grid,
)

SEED = 42
DRAWS = 1000
SQUEEZERS = [p for p in PUMPS if p.is_squeezer]

LINES = []


def report(number, title, results, extra=()):
    """Print and record one line for a criterion built from several suites and spot checks.

    ``extra`` holds ``(label, ok, detail)`` for checks that are not suites.
    """
    ok = all(r.passed for r in results) and all(e[1] for e in extra)
    parts = [f"{r.name} worst={r.worst:.3e} tol={r.tol:.0e}{'' if r.passed else ' FAIL'}" for r in results]
    parts += [f"{label} {detail}{'' if good else ' FAIL'}" for label, good, detail in extra]
    line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}): " + "; ".join(parts)
    LINES.append(line)
    print(line)
    return ok


def draws(pumps, n=DRAWS, seed=SEED, **kw):
    rng = np.random.default_rng(seed)
    return {pump: [draw_params(rng, pump, **kw) for _ in range(n)] for pump in pumps}


@pytest.fixture(scope="module")
def beamsplitter_draws():
    return draws([BEAMSPLITTER], seed=SEED + 1)[BEAMSPLITTER]


@pytest.fixture(scope="module")
def squeezer_draws():
    return draws(SQUEEZERS, seed=SEED + 2)


def test_criterion_1_channels():
    points = draws(PUMPS)
    t0 = time.perf_counter()
    rwa, full = check_channels(points)
    elapsed = time.perf_counter() - t0
    assert report(1, "closed form vs numeric channel", [full, rwa], [("runtime", elapsed < 30, f"{elapsed:.1f} s < 30 s")])


def test_criterion_2_ppt(beamsplitter_draws):
    grid = check_ppt_thresholds(tau_c_grid(10, 10))
    lossy = check_ppt_thresholds(beamsplitter_draws[:100])
    spot = verify_threshold_numerically(DptParams(1.0, 1.0, 0.5, 0.5, 0.0), which="ppt").value
    err = abs(spot - 0.5)
    assert report(2, "PPT threshold", [grid, lossy], [("spot", err <= 1e-6, f"n_th={spot:.9f} err={err:.1e}")])


def test_criterion_3_separability():
    res = check_sep_thresholds(tau_c_grid(5, 5))
    all_cells = "band_checked=25" in res.detail
    assert report(3, "separability threshold", [res], [("band", all_cells, res.detail)])


def test_criterion_4_log_negativity(squeezer_draws):
    res = check_squeezer_en(squeezer_draws)
    expected = -math.log(1 + 4 * (3 - math.sqrt(10)))
    spots = [squeezer_log_negativity(DptParams(1.0, 1.0, 1.0, 1.0, 0.0), p) for p in SQUEEZERS]
    err = max(abs(s - expected) for s in spots)
    assert report(4, "squeezer log-negativity", [res], [("spot", err <= 1e-6, f"E_N={spots[0]:.10f} err={err:.1e}")])


def test_criterion_5_tmsls(squeezer_draws):
    res = check_tmsls(squeezer_draws)
    t = tmsls_params(DptParams(1.0, 1.0, 1.0, 1.0, 0.0), SQUEEZERS[0])
    err = max(abs(t.cosh_r_prime - 17), abs(t.tau_prime_i - 1), abs(t.tau_prime_j - 0.5))
    detail = f"cosh r'={t.cosh_r_prime:.12g} tau'=({t.tau_prime_i:.12g}, {t.tau_prime_j:.12g})"
    assert report(5, "squeezed-lossy reconstruction", [res], [("spot", err <= 1e-12, detail)])


def test_criterion_6_entanglement_breaking(beamsplitter_draws, squeezer_draws):
    results = [
        check_eb_thresholds(beamsplitter_draws, eps_values=(0.1, 0.4, 0.7, 1.0)),
        check_squeezer_eb(squeezer_draws),
        check_minimal_noise(beamsplitter_draws),
    ]
    assert report(6, "one-mode EB thresholds", results)


def test_criterion_7_region_ordering(beamsplitter_draws):
    assert report(7, "region ordering", [check_region_ordering(beamsplitter_draws)])


def test_criterion_8_r_independence():
    res = check_r_independence(region_probe_points(tau_c_grid(5, 5)), rs=(0.5, 1.0, 2.0, 3.0, 5.0))
    assert report(8, "Choi squeezing independence", [res])


def test_criterion_9_symmetric_sweep(tmp_path):
    spec = SweepSpec.from_dict(
        {"param": ["tau_a", "tau_b"], "lo": 0.05, "hi": 0.95, "count": 91, "fixed": {"C_a": 1.0, "C_b": 1.0, "n_th": 0.0}}
    )
    path = tmp_path / "symmetric_tau.csv"
    path.write_text(rows_to_csv(run_sweep(spec)))
    rows = read_csv(path.read_text())
    assert report(9, "symmetric sweep curves", [check_symmetric_curves(rows, tol=1e-6)], [("rows", len(rows) == 91, f"{len(rows)} rows")])

