import numpy as np
import pytest

from dptgauss.errors import InvalidParams, PoleProximity
from dptgauss.gaussian import channel_is_cp
from dptgauss.model import (
    BEAMSPLITTER,
    PUMPS,
    SQUEEZER_MICROWAVE_BLUE,
    SQUEEZER_OPTICAL_BLUE,
    DptParams,
    PhysicalParams,
    PumpConfig,
    build_state_space,
    closed_form_channel,
    embedded_numeric_channel,
    quadrature_transfer,
    to_dimensionless,
    to_physical,
    transfer_function,
)


def physical(**kw):
    base = dict(kappa_a_c=0.6, kappa_a_e=0.4, kappa_b_c=0.3, kappa_b_e=0.2, gamma_m=0.01,
                G_a=0.05, G_b=0.03, omega_m=100.0, Delta_a=-100.0, Delta_b=-100.0)
    base.update(kw)
    return PhysicalParams(**base)


def test_ideal_symmetric_coefficients():
    T = closed_form_channel(DptParams(1.0, 1.0, 1.0, 1.0, 0.0), BEAMSPLITTER).T
    assert np.abs(T[:2, :2] - np.eye(2) / 3).max() < 1e-15
    assert np.abs(T[:2, 2:] + 2 / 3 * np.eye(2)).max() < 1e-15
    assert np.abs(T[2:, :2] + 2 / 3 * np.eye(2)).max() < 1e-15


@pytest.mark.parametrize("Cb", [0.5, 2.0, 10.0])
def test_impedance_matched_optical_port(Cb):
    # with tau = 1 the optical reflection vanishes at C_a = 1 + C_b
    ch = closed_form_channel(DptParams(1 + Cb, Cb, 1.0, 1.0, 0.0), BEAMSPLITTER)
    assert np.abs(ch.T[:2, :2]).max() < 1e-15
    assert abs(ch.T[0, 2] ** 2 - Cb / (1 + Cb)) < 1e-14


@pytest.mark.parametrize("pump", PUMPS)
def test_zero_cooperativity_decouples(pump):
    # a bare cavity reflects with amplitude 2 tau - 1 and adds vacuum only
    ch = closed_form_channel(DptParams(0.0, 0.0, 0.3, 0.8, 2.0), pump)
    assert np.abs(ch.T - np.diag([-0.4, -0.4, 0.6, 0.6])).max() < 1e-15
    assert np.abs(ch.N - np.diag([0.84, 0.84, 0.64, 0.64]) / 2).max() < 1e-15


def test_pole_guard():
    with pytest.raises(PoleProximity):
        closed_form_channel(DptParams(1.0 + 1e-8, 0.0, 0.5, 0.5, 0.0), SQUEEZER_OPTICAL_BLUE)
    with pytest.raises(PoleProximity):
        closed_form_channel(DptParams(2.0, 1.0 - 1e-9, 0.5, 0.5, 0.0), SQUEEZER_OPTICAL_BLUE)
    closed_form_channel(DptParams(2.0, 1.0 - 1e-3, 0.5, 0.5, 0.0), SQUEEZER_OPTICAL_BLUE)


def test_pump_and_param_validation():
    with pytest.raises(InvalidParams):
        PumpConfig(1, 1)
    with pytest.raises(InvalidParams):
        PumpConfig(0, -1)
    with pytest.raises(InvalidParams):
        DptParams(1.0, 1.0, 1.2, 0.5, 0.0)
    with pytest.raises(InvalidParams):
        DptParams(-1.0, 1.0, 0.5, 0.5, 0.0)
    with pytest.raises(InvalidParams):
        DptParams(1.0, 1.0, 0.5, 0.5, 0.0, eps_a=0.0)
    with pytest.raises(InvalidParams):
        closed_form_channel(physical(), BEAMSPLITTER)
    with pytest.raises(InvalidParams):
        build_state_space(DptParams(1.0, 1.0, 0.5, 0.5, 0.0))


def test_to_dimensionless_example():
    d = to_dimensionless(physical(n_th=0.25))
    assert abs(d.C_a - 4 * 0.05**2 / (1.0 * 0.01)) < 1e-15
    assert abs(d.C_b - 4 * 0.03**2 / (0.5 * 0.01)) < 1e-15
    assert abs(d.tau_a - 0.6) < 1e-15 and abs(d.tau_b - 0.6) < 1e-15
    assert d.n_th == 0.25


def test_to_physical_round_trip():
    d = DptParams(1.7, 0.4, 0.35, 0.9, 0.6)
    back = to_dimensionless(to_physical(d, BEAMSPLITTER))
    for key in ("C_a", "C_b", "tau_a", "tau_b", "n_th"):
        assert abs(getattr(back, key) - getattr(d, key)) < 1e-12


def test_state_space_structure():
    ss = build_state_space(physical())
    assert np.array_equal(ss.D[[0, 1, 2, 3], [0, 2, 5, 7]], [-1, -1, -1, -1])
    assert np.count_nonzero(ss.D) == 4
    assert np.all(np.count_nonzero(ss.B, axis=1) == [2, 2, 1, 2, 2, 1])
    assert abs(ss.C[0, 0] - np.sqrt(0.6)) < 1e-15 and abs(ss.C[1, 1] - np.sqrt(0.3)) < 1e-15


def test_no_coupling_is_block_diagonal():
    A = build_state_space(physical(G_a=0.0, G_b=0.0)).A
    assert np.count_nonzero(A - np.diag(np.diag(A))) == 0


def test_single_cavity_reflection_is_all_pass():
    # a lossless one-port cavity reflects everything at every frequency
    p = physical(G_a=0.0, G_b=0.0, kappa_a_e=0.0)
    xi = transfer_function(build_state_space(p), 100.0)
    assert abs(xi[0, 0] - 1) < 1e-12
    for w in (99.0, 100.3, 101.7):
        assert abs(abs(transfer_function(build_state_space(p), w)[0, 0]) - 1) < 1e-12


def test_creator_rows_are_conjugate():
    ss = build_state_space(physical(Delta_b=100.0))
    assert np.abs(ss.A[3:, 3:] - ss.A[:3, :3].conj()).max() == 0
    assert np.abs(ss.A[3:, :3] - ss.A[:3, 3:].conj()).max() == 0


@pytest.mark.parametrize("delta_b", [-100.0, 100.0])
@pytest.mark.parametrize("w", [-100.0, 3.0, 100.0])
def test_extended_transfer_preserves_commutators(delta_b, w):
    ss = build_state_space(physical(Delta_b=delta_b), environment_outputs=True)
    xi = transfer_function(ss, w)
    K = np.diag([1.0] * 5 + [-1.0] * 5)
    assert np.abs(xi @ K @ xi.conj().T - K).max() < 1e-9


def test_quadrature_transfer_rejects_wrong_detuning():
    with pytest.raises(InvalidParams):
        quadrature_transfer(physical(), SQUEEZER_OPTICAL_BLUE)


def test_rotating_wave_sidebands_vanish():
    p = to_physical(DptParams(1.0, 0.5, 0.6, 0.7, 0.0), BEAMSPLITTER)
    S, inputs = quadrature_transfer(p, BEAMSPLITTER, rotating_wave=True)
    assert len(inputs) == 10 and S.shape == (4, 20)
    assert np.abs(S[:, 10:]).max() == 0


@pytest.mark.parametrize("pump", PUMPS)
def test_vacuum_noise_matches_transfer(pump):
    # at n_th = 0 every input is vacuum, so N = M M^T / 2
    d = DptParams(0.8, 0.3, 0.6, 0.9, 0.0)
    p = to_physical(d, pump)
    S, _ = quadrature_transfer(p, pump, rotating_wave=True)
    ch = embedded_numeric_channel(d, pump, rotating_wave=True)
    M = S[:, 4:]
    assert np.abs(ch.N - M @ M.T / 2).max() < 1e-12


@pytest.mark.parametrize("pump", PUMPS)
def test_numeric_matches_closed_form(pump):
    d = DptParams(0.8, 0.3, 0.6, 0.9, 1.3, delta_a=0.9, eps_b=0.7)
    ref = closed_form_channel(d, pump)
    rwa = embedded_numeric_channel(d, pump, rotating_wave=True)
    full = embedded_numeric_channel(d, pump)
    assert max(np.abs(rwa.T - ref.T).max(), np.abs(rwa.N - ref.N).max()) < 1e-9
    assert max(np.abs(full.T - ref.T).max(), np.abs(full.N - ref.N).max()) < 1e-4


def test_reciprocity_under_label_swap():
    d = DptParams(1.4, 0.6, 0.3, 0.8, 0.9, delta_a=0.8, eps_b=0.6)
    a = closed_form_channel(d, BEAMSPLITTER)
    b = closed_form_channel(d.swapped(), BEAMSPLITTER)
    P = np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]])
    assert np.abs(P @ a.T @ P - b.T).max() < 1e-14
    assert np.abs(P @ a.N @ P - b.N).max() < 1e-14
    s = closed_form_channel(d, SQUEEZER_OPTICAL_BLUE)
    t = closed_form_channel(d.swapped(), SQUEEZER_MICROWAVE_BLUE)
    assert np.abs(P @ s.N @ P - t.N).max() < 1e-14 * np.abs(s.N).max()


@pytest.mark.parametrize("pump", PUMPS)
def test_random_draws_are_cp(pump):
    rng = np.random.default_rng(7)
    for _ in range(50):
        Ca, Cb = rng.uniform(0.05, 3, 2)
        if 1 - pump.sigma_a * Ca - pump.sigma_b * Cb < 0.1:
            continue
        d = DptParams(Ca, Cb, *rng.uniform(0, 1, 2), rng.uniform(0, 3), *rng.uniform(0.3, 1, 4))
        assert channel_is_cp(closed_form_channel(d, pump), 1e-9)
