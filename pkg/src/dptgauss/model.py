"""Doubly-parametric transducer as a two-mode Gaussian channel.

Two independent routes produce the optical/microwave channel ``(T, N)``:

* :func:`numeric_channel` evaluates the Langevin state-space model in the
  frequency domain, converts the relevant rows of the transfer function to
  quadratures and traces out every bath mode;
* :func:`closed_form_channel` evaluates the resolved-sideband closed forms in
  terms of the dimensionless device parameters.

Mode 0 is the optical port ``a`` and mode 1 the microwave port ``b``.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, ModelInconsistency, PoleProximity, SingularResolvent
from .gaussian import (
    GaussianChannel,
    ModeKind,
    ModeLabel,
    channel_is_cp,
    compose,
    loss_channel,
)

OE_MODES = (ModeLabel(0, ModeKind.OPTICAL, "a"), ModeLabel(1, ModeKind.MICROWAVE, "b"))
POLE_GUARD = 1e-6

# embedding of dimensionless parameters into a deep resolved-sideband device
EMBED_OMEGA_M = 1.0
EMBED_KAPPA = 1e-7
EMBED_GAMMA_M = 1e-8

# input operator ordering: a^c, a^e, b^c, b^e, c^e (annihilators, then creators)
_INPUT_NAMES = ("a_c", "a_e", "b_c", "b_e", "c_e")


@dataclass(frozen=True)
class PumpConfig:
    """Signs of the optical and microwave pump detunings (-1 red, +1 blue)."""

    sigma_a: int = -1
    sigma_b: int = -1

    def __post_init__(self):
        if self.sigma_a not in (-1, 1) or self.sigma_b not in (-1, 1):
            raise InvalidParams(f"pump signs must be +1 or -1, got {self.sigma_a}, {self.sigma_b}")
        if self.sigma_a == self.sigma_b == 1:
            raise InvalidParams("both pumps blue detuned is not a supported operating point")

    @property
    def is_beamsplitter(self):
        return self.sigma_a == self.sigma_b == -1

    @property
    def is_squeezer(self):
        return self.sigma_a * self.sigma_b == -1


BEAMSPLITTER = PumpConfig(-1, -1)
SQUEEZER_OPTICAL_BLUE = PumpConfig(1, -1)
SQUEEZER_MICROWAVE_BLUE = PumpConfig(-1, 1)
PUMPS = (BEAMSPLITTER, SQUEEZER_OPTICAL_BLUE, SQUEEZER_MICROWAVE_BLUE)


@dataclass(frozen=True)
class PhysicalParams:
    """Rates of the linearized Langevin model, all in rad/s."""

    kappa_a_c: float
    kappa_a_e: float
    kappa_b_c: float
    kappa_b_e: float
    gamma_m: float
    G_a: float
    G_b: float
    omega_m: float
    Delta_a: float
    Delta_b: float
    n_th: float = 0.0

    def __post_init__(self):
        for name in ("kappa_a_c", "kappa_a_e", "kappa_b_c", "kappa_b_e", "G_a", "G_b", "n_th"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise InvalidParams(f"{name} must be finite and nonnegative, got {value}")
        for name in ("gamma_m", "omega_m", "kappa_a", "kappa_b"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise InvalidParams(f"{name} must be positive, got {value}")
        if 4 * self.omega_m < 10 * max(self.kappa_a, self.kappa_b, self.gamma_m):
            warnings.warn("resolved-sideband condition 4 omega_m >> kappa, gamma_m is weak", stacklevel=2)

    @property
    def kappa_a(self):
        return self.kappa_a_c + self.kappa_a_e

    @property
    def kappa_b(self):
        return self.kappa_b_c + self.kappa_b_e


@dataclass(frozen=True)
class DptParams:
    """Dimensionless device parameters plus external transmissivities.

    ``delta_*`` are losses before the device and ``eps_*`` after it.
    """

    C_a: float
    C_b: float
    tau_a: float
    tau_b: float
    n_th: float
    delta_a: float = 1.0
    delta_b: float = 1.0
    eps_a: float = 1.0
    eps_b: float = 1.0

    def __post_init__(self):
        for name in ("C_a", "C_b", "n_th"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise InvalidParams(f"{name} must be finite and nonnegative, got {value}")
        for name in ("tau_a", "tau_b"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise InvalidParams(f"{name} must lie in [0, 1], got {value}")
        for name in ("delta_a", "delta_b", "eps_a", "eps_b"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise InvalidParams(f"{name} must lie in (0, 1], got {value}")

    def replace(self, **changes) -> "DptParams":
        return dataclasses.replace(self, **changes)

    def swapped(self) -> "DptParams":
        """Same device with the optical and microwave labels exchanged."""
        return DptParams(
            self.C_b, self.C_a, self.tau_b, self.tau_a, self.n_th,
            self.delta_b, self.delta_a, self.eps_b, self.eps_a,
        )

    def as_dict(self):
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class StateSpaceModel:
    """``da/dt = A a + B a_in``, ``a_out = C a + D a_in`` for ``a = (a, b, c, a+, b+, c+)``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray


def build_state_space(p: PhysicalParams, rotating_wave: bool = False, environment_outputs: bool = False) -> StateSpaceModel:
    """State-space matrices of the linearized equations of motion.

    With ``rotating_wave`` the couplings that are off resonance for the pump
    signs implied by ``Delta_a`` and ``Delta_b`` are dropped. With
    ``environment_outputs`` the output vector also carries the bath outputs,
    ordered like the inputs, which makes the transfer function square.
    """
    if isinstance(p, DptParams):
        raise InvalidParams("build_state_space takes PhysicalParams; see to_physical()")
    ka, kb = p.kappa_a, p.kappa_b
    Ga, Gb = p.G_a, p.G_b
    top = np.array(
        [
            [1j * p.Delta_a - ka / 2, 0, 1j * Ga, 0, 0, 1j * Ga],
            [0, 1j * p.Delta_b - kb / 2, 1j * Gb, 0, 0, 1j * Gb],
            [1j * Ga, 1j * Gb, -p.gamma_m / 2 - 1j * p.omega_m, 1j * Ga, 1j * Gb, 0],
        ],
        dtype=complex,
    )
    if rotating_wave:
        # red pump keeps a <-> c, blue keeps a <-> c^dagger
        if p.Delta_a < 0:
            top[0, 5] = top[2, 3] = 0
        else:
            top[0, 2] = top[2, 0] = 0
        if p.Delta_b < 0:
            top[1, 5] = top[2, 4] = 0
        else:
            top[1, 2] = top[2, 1] = 0
    # the creation-operator rows are the complex conjugates with blocks swapped
    A = np.zeros((6, 6), dtype=complex)
    A[:3] = top
    A[3:, 3:] = top[:, :3].conj()
    A[3:, :3] = top[:, 3:].conj()

    rates = np.sqrt([p.kappa_a_c, p.kappa_a_e, p.kappa_b_c, p.kappa_b_e, p.gamma_m])
    B = np.zeros((6, 10), dtype=complex)
    for row, cols in ((0, (0, 1)), (1, (2, 3)), (2, (4,))):
        for col in cols:
            B[row, col] = B[row + 3, col + 5] = rates[col]

    if environment_outputs:
        C = np.zeros((10, 6), dtype=complex)
        for k, (row, rate) in enumerate(zip((0, 0, 1, 1, 2), rates)):
            C[k, row] = C[k + 5, row + 3] = rate
        D = -np.eye(10, dtype=complex)
    else:
        C = np.zeros((4, 6), dtype=complex)
        C[0, 0] = C[2, 3] = rates[0]
        C[1, 1] = C[3, 4] = rates[2]
        D = np.zeros((4, 10), dtype=complex)
        D[0, 0] = D[1, 2] = D[2, 5] = D[3, 7] = -1
    return StateSpaceModel(A, B, C, D)


def transfer_function(ss: StateSpaceModel, omega: float) -> np.ndarray:
    """``Xi(w) = C (-i w I - A)^-1 B + D``."""
    resolvent = -1j * omega * np.eye(ss.A.shape[0]) - ss.A
    if np.linalg.cond(resolvent) > 1e14:
        raise SingularResolvent(omega)
    try:
        return ss.C @ np.linalg.solve(resolvent, ss.B) + ss.D
    except np.linalg.LinAlgError as exc:
        raise SingularResolvent(omega) from exc


def _mode_frequency(sigma, omega_m):
    # with e^{-i w t} time dependence a red-detuned cavity resonates at w = +omega_m
    return -sigma * omega_m


def quadrature_transfer(p: PhysicalParams, pump: PumpConfig, rotating_wave: bool = False):
    """Quadrature-basis transfer matrix from all input modes to the two signal outputs.

    Returns ``(S, inputs)``: ``S`` is ``4 x 20`` and ``inputs`` lists the
    ``(name, frequency)`` of each input mode in column order. The first two
    inputs are the optical and microwave signal modes; the next three are the
    resonant baths (``a_e``, ``b_e``, ``c_e``); the remaining five are the
    off-resonant sidebands, whose columns vanish under ``rotating_wave``.
    """
    wm = p.omega_m
    for sigma, delta, name in ((pump.sigma_a, p.Delta_a, "Delta_a"), (pump.sigma_b, p.Delta_b, "Delta_b")):
        if abs(delta - sigma * wm) > 1e-9 * wm:
            raise InvalidParams(f"{name}={delta} does not match pump sign {sigma} at omega_m={wm}")
    ss = build_state_space(p, rotating_wave=rotating_wave)
    wa, wb = _mode_frequency(pump.sigma_a, wm), _mode_frequency(pump.sigma_b, wm)
    inputs = [(0, wa), (2, wb), (1, wa), (3, wb), (4, wm)]
    inputs += [(j, f) for j in range(5) for f in (wm, -wm) if (j, f) not in inputs]
    S = np.zeros((4, 2 * len(inputs)))
    for row, (out, w) in enumerate(((0, wa), (1, wb))):
        xi = transfer_function(ss, w)[out]
        # annihilator / creator coefficients of each input mode
        K = np.array([xi[j] if f == w else 0 for j, f in inputs])
        L = np.array([xi[5 + j] if f != w else 0 for j, f in inputs])
        S[2 * row, 0::2] = (K + L).real
        S[2 * row, 1::2] = -(K - L).imag
        S[2 * row + 1, 0::2] = (K + L).imag
        S[2 * row + 1, 1::2] = (K - L).real
    return S, [(_INPUT_NAMES[j], f) for j, f in inputs]


def numeric_channel(
    p: PhysicalParams,
    pump: PumpConfig,
    delta=(1.0, 1.0),
    eps=(1.0, 1.0),
    rotating_wave: bool = False,
    cp_tol: float = 1e-9,
) -> GaussianChannel:
    """Two-mode channel from the frequency-domain transfer function.

    Bath inputs are in vacuum except the mediator bath, which carries
    ``n_th`` quanta. External losses ``delta`` (before) and ``eps`` (after)
    are composed as explicit beamsplitter channels.
    """
    S, inputs = quadrature_transfer(p, pump, rotating_wave)
    T, M = S[:, :4], S[:, 4:]
    sigma = np.full(M.shape[1], 0.5)
    for k, (name, _) in enumerate(inputs[2:]):
        if name == "c_e":
            sigma[2 * k : 2 * k + 2] += p.n_th
    core = GaussianChannel(T, (M * sigma) @ M.T, OE_MODES, OE_MODES)
    ch = compose(loss_channel(delta), core, loss_channel(eps))
    if not channel_is_cp(ch, cp_tol):
        raise ModelInconsistency("numerically derived transducer channel is not completely positive")
    return ch


def closed_form_channel(d: DptParams, pump: PumpConfig, pole_guard: float = POLE_GUARD) -> GaussianChannel:
    """Resolved-sideband closed forms for ``T`` and ``N`` including external losses."""
    if not isinstance(d, DptParams):
        raise InvalidParams("closed_form_channel takes DptParams")
    sa, sb = pump.sigma_a, pump.sigma_b
    Ca, Cb, ta, tb, nth = d.C_a, d.C_b, d.tau_a, d.tau_b, d.n_th
    da, db, ea, eb = d.delta_a, d.delta_b, d.eps_a, d.eps_b
    den = 1 - sa * Ca - sb * Cb
    if abs(den) <= pole_guard:
        raise PoleProximity(f"|1 - s_a C_a - s_b C_b| = {abs(den):.3g} is within the pole guard {pole_guard}")
    I2 = np.eye(2)
    cross = 2 * np.sqrt(ta * tb * Ca * Cb)
    T = np.block(
        [
            [np.sqrt(da * ea) * (-den + 2 * ta * (1 - sb * Cb)) * I2, np.sqrt(ea * db) * cross * np.diag([sa, sb])],
            [np.sqrt(da * eb) * cross * np.diag([sb, sa]), np.sqrt(db * eb) * (-den + 2 * tb * (1 - sa * Ca)) * I2],
        ]
    ) / den
    mu = 1 - ea * (
        da * (den - 2 * ta * (1 - sb * Cb)) ** 2
        - 4 * ta * Ca * (1 + sa + 2 * nth + Cb * (2 + sa + sb - db * tb))
    ) / den**2
    nu = 1 - eb * (
        db * (den - 2 * tb * (1 - sa * Ca)) ** 2
        - 4 * tb * Cb * (1 + sb + 2 * nth + Ca * (2 + sa + sb - da * ta))
    ) / den**2
    gamma = np.sqrt(ea * eb) * cross / den**2 * (
        4 * nth
        + (sa * da + sb * db) * den
        + (1 - sa * sb) * (1 + Ca + Cb)
        - 2 * sa * da * ta * (1 - sb * Cb)
        - 2 * sb * db * tb * (1 - sa * Ca)
    )
    corr = gamma * np.diag([sa * sb, 1])
    N = 0.5 * np.block([[mu * I2, corr], [corr, nu * I2]])
    return GaussianChannel(T, N, OE_MODES, OE_MODES)


def to_dimensionless(p: PhysicalParams) -> DptParams:
    """Cooperativities ``4 G^2/(kappa gamma_m)`` and coupling transmissivities ``kappa^c/kappa``."""
    return DptParams(
        C_a=4 * p.G_a**2 / (p.kappa_a * p.gamma_m),
        C_b=4 * p.G_b**2 / (p.kappa_b * p.gamma_m),
        tau_a=p.kappa_a_c / p.kappa_a,
        tau_b=p.kappa_b_c / p.kappa_b,
        n_th=p.n_th,
    )


def to_physical(
    d: DptParams,
    pump: PumpConfig,
    omega_m: float = EMBED_OMEGA_M,
    kappa: float = EMBED_KAPPA,
    gamma_m: float = EMBED_GAMMA_M,
) -> PhysicalParams:
    """Embed dimensionless parameters in a device deep in the resolved-sideband regime.

    External losses are not part of the physical model; pass them to
    :func:`numeric_channel` separately.
    """
    return PhysicalParams(
        kappa_a_c=d.tau_a * kappa,
        kappa_a_e=(1 - d.tau_a) * kappa,
        kappa_b_c=d.tau_b * kappa,
        kappa_b_e=(1 - d.tau_b) * kappa,
        gamma_m=gamma_m,
        G_a=np.sqrt(d.C_a * kappa * gamma_m / 4),
        G_b=np.sqrt(d.C_b * kappa * gamma_m / 4),
        omega_m=omega_m,
        Delta_a=pump.sigma_a * omega_m,
        Delta_b=pump.sigma_b * omega_m,
        n_th=d.n_th,
    )


def embedded_numeric_channel(d: DptParams, pump: PumpConfig, rotating_wave: bool = False, **embed) -> GaussianChannel:
    """:func:`numeric_channel` for dimensionless parameters via :func:`to_physical`."""
    p = to_physical(d, pump, **embed)
    return numeric_channel(
        p, pump, delta=(d.delta_a, d.delta_b), eps=(d.eps_a, d.eps_b), rotating_wave=rotating_wave
    )
