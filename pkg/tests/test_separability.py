import numpy as np
import pytest

from dptgauss import separability as sep_mod
from dptgauss.analysis import CHOI_PARTITION, beamsplitter_choi, thresholds
from dptgauss.errors import InvalidState
from dptgauss.gaussian import Partition, is_ppt, random_symplectic, tensor_cm, thermal_cm, tmsv_cm
from dptgauss.model import DptParams
from dptgauss.separability import (
    Separability,
    _local_normal_form,
    classify_separability,
    is_separable,
    is_separable_gklc,
    separability_margin,
)


def random_state(rng, n, nu=(0.5, 3.0)):
    S = random_symplectic(n, rng)
    return S @ np.diag(np.repeat(rng.uniform(*nu, n), 2)) @ S.T


def test_product_vacuum_separable():
    assert is_separable_gklc(np.eye(4) / 2, {0}) is Separability.SEPARABLE


def test_tmsv_entangled():
    assert is_separable_gklc(tmsv_cm(1.0).data, {0}) is Separability.ENTANGLED


@pytest.mark.parametrize("method", ["sdp", "iterative"])
def test_local_products_are_separable(method):
    rng = np.random.default_rng(1)
    for _ in range(5):
        V = tensor_cm(random_state(rng, 1), random_state(rng, 1)).data
        assert classify_separability(V, {0}, method=method) is Separability.SEPARABLE


def test_one_by_one_mode_matches_ppt():
    # for one mode on each side PPT is necessary and sufficient
    rng = np.random.default_rng(2)
    seen = set()
    for _ in range(30):
        V = random_state(rng, 2)
        nu_pt = np.sort(np.abs(np.linalg.eigvals(1j * np.kron(np.eye(2), [[0, 1], [-1, 0]]) @ (np.diag([1, -1, 1, 1]) @ V @ np.diag([1, -1, 1, 1])))))[0]
        if abs(nu_pt - 0.5) < 1e-2:
            continue
        verdict = classify_separability(V, {0})
        expected = Separability.SEPARABLE if is_ppt(V, {0}) else Separability.ENTANGLED
        assert verdict is expected
        seen.add(verdict)
    assert seen == {Separability.SEPARABLE, Separability.ENTANGLED}


def test_never_separable_when_npt():
    rng = np.random.default_rng(3)
    for _ in range(20):
        V = random_state(rng, 3, nu=(0.5, 1.0))
        part = Partition.split({0}, 3)
        if not is_ppt(V, part):
            assert classify_separability(V, part) is not Separability.SEPARABLE


def test_thermal_product_margin_is_zero():
    V = tensor_cm(thermal_cm([0.3, 1.2]), tmsv_cm(0.4)).data
    s, status = separability_margin(V, Partition.split({0, 1}, 4))
    assert status.startswith("optimal")
    assert abs(s) < 1e-7


@pytest.mark.parametrize("tau,C", [(0.5, 1.0), (0.3, 2.0), (0.8, 0.5)])
def test_bound_entangled_band(tau, C):
    d = DptParams(C, C, tau, tau, 0.0)
    th = thresholds(d)
    above = beamsplitter_choi(d.replace(n_th=1.05 * th.sep_threshold))
    inside = beamsplitter_choi(d.replace(n_th=0.95 * th.sep_threshold))
    assert th.ppt_threshold < 0.95 * th.sep_threshold
    assert classify_separability(above, CHOI_PARTITION) is Separability.SEPARABLE
    assert is_ppt(inside, CHOI_PARTITION)
    assert classify_separability(inside, CHOI_PARTITION) is Separability.ENTANGLED


def test_iterative_agrees_away_from_boundary():
    d = DptParams(1.0, 1.0, 0.5, 0.5, 0.0)
    for n, expected in [(0.6, Separability.ENTANGLED), (1.5, Separability.SEPARABLE), (3.0, Separability.SEPARABLE)]:
        V = beamsplitter_choi(d.replace(n_th=n), r=1.0)
        assert classify_separability(V, CHOI_PARTITION, method="iterative") is expected
        assert classify_separability(V, CHOI_PARTITION) is expected


def test_local_normal_form_diagonalizes_blocks():
    d = DptParams(2.0, 1.0, 0.4, 0.7, 1.0)
    V = beamsplitter_choi(d, r=5.0).data
    W = _local_normal_form(V, 2)
    for blk in (W[:4, :4], W[4:, 4:]):
        assert np.abs(blk - np.diag(np.diag(blk))).max() < 1e-8 * np.abs(V).max()


def test_undecided_band(monkeypatch):
    monkeypatch.setattr(sep_mod, "separability_margin", lambda *a, **k: (5 * sep_mod.SDP_TOL, "optimal"))
    V = tensor_cm(thermal_cm([0.3]), thermal_cm([0.3])).data
    assert classify_separability(V, {0}) is Separability.UNDECIDED
    with pytest.raises(RuntimeError):
        is_separable(V, {0})
    monkeypatch.setattr(sep_mod, "separability_margin", lambda *a, **k: (float("nan"), "solver_error"))
    assert classify_separability(V, {0}) is Separability.UNDECIDED


def test_rejects_unphysical():
    with pytest.raises(InvalidState):
        classify_separability(0.2 * np.eye(4), {0})
    with pytest.raises(ValueError):
        classify_separability(np.eye(4) / 2, {0}, method="nope")
