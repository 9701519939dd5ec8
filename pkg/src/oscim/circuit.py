"""Electrical parameters of the oscillator network and their algorithmic images.

Defaults follow the reference design: 1 GHz signal tanks, 2 GHz pump tanks, a
nonlinear coupling capacitance of 0.1/(2 pi) nF/V and a 10 mV saturation
amplitude. The coupling resistance is scaled with the average coordination
number of the problem so that ``R = 500 ohm`` at ``Gamma = 47.94``.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.constants as const

from .problems import IsingInstance
from .state import AlgorithmState, OscillatorState

K_BOLTZMANN = const.k
REFERENCE_GAMMA = 47.94
REFERENCE_R = 500.0
PUMP_GAIN_MARGIN = 1.1
PUMP_EIGEN_INDEX = 50


class Method(str, enum.Enum):
    PLAIN = "plain_lagrange"
    AUGMENTED = "augmented_lagrange"


def _method(m) -> Method:
    aliases = {"plain": Method.PLAIN, "augmented": Method.AUGMENTED}
    return aliases.get(m, None) or Method(m)


@dataclass(frozen=True)
class CircuitParams:
    """Component values (SI units). ``R_p = inf`` means a lossless pump."""

    C_s: float
    L_s: float
    C_p: float
    L_p: float
    C_0: float
    C_N: float
    A_sat: float
    R: float
    R_p: float = math.inf
    G_0: float = 0.0
    G_N: float = 0.0
    T: float = 300.0
    method: Method = Method.AUGMENTED

    def __post_init__(self):
        object.__setattr__(self, "method", _method(self.method))
        for name in ("C_s", "L_s", "C_p", "L_p", "C_N", "A_sat", "R", "R_p"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.C_0 < 0 or self.G_0 < 0 or self.G_N < 0 or self.T < 0:
            raise ValueError("C_0, G_0, G_N and T must be non-negative")
        if self.method is Method.PLAIN and (self.G_0 != 0 or self.G_N != 0):
            raise ValueError("plain Lagrange circuits have no signal conductance (G_0 = G_N = 0)")
        pump_w = 1.0 / math.sqrt(self.L_p * self.C_0p)
        if abs(pump_w - 2 * self.omega0) > 1e-9 * 2 * self.omega0:
            raise ValueError(f"pump resonance {pump_w:.6g} rad/s is not 2*omega0 = {2 * self.omega0:.6g}")

    @property
    def C_0s(self) -> float:
        return self.C_0 + self.C_s

    @property
    def C_0p(self) -> float:
        return self.C_0 + self.C_p

    @property
    def omega0(self) -> float:
        return 1.0 / math.sqrt(self.L_s * self.C_0s)

    @property
    def I_p(self) -> float:
        return self.A_sat**2 * self.C_N * self.omega0

    @property
    def Q_p(self) -> float:
        return self.R_p * math.sqrt(self.C_p / self.L_p)

    @property
    def lossless_pump(self) -> bool:
        return math.isinf(self.R_p)

    def replace(self, **changes) -> "CircuitParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["method"] = self.method.value
        d.update(omega0=self.omega0, C_0s=self.C_0s, C_0p=self.C_0p, I_p=self.I_p)
        return d


@dataclass(frozen=True)
class LagrangeParams:
    kappa: float
    kappa_prime: float
    alpha: float


def lagrange_params(params: CircuitParams) -> LagrangeParams:
    """Primal/dual rates and augmentation weight realised by the circuit."""
    return LagrangeParams(
        kappa=1.0 / (8 * params.R * params.C_0s),
        kappa_prime=params.C_N**2 * params.omega0**2 * params.R * params.A_sat**2 / params.C_0p,
        alpha=1.5 * params.G_N * params.R * params.A_sat**2,
    )


def coordination_number(inst: IsingInstance) -> float:
    """Average coordination number ``(sum |J_ij| + sum |h_i| / 2) / n``."""
    return float((abs(inst.J).sum() + 0.5 * np.abs(inst.h).sum()) / inst.n)


def pump_resistance(Q_p: float, params: CircuitParams) -> float:
    return Q_p * math.sqrt(params.L_p / params.C_p)


def default_params(inst: IsingInstance | None = None, method="augmented", *, T: float = 300.0,
                   Q_p: float | None = None, gamma: float | None = None) -> CircuitParams:
    """Reference component values, with R scaled to the instance's coordination number."""
    method = _method(method)
    if gamma is None:
        gamma = REFERENCE_GAMMA if inst is None else coordination_number(inst)
    if gamma <= 0:
        raise ValueError("instance has no couplings or fields (Gamma = 0)")
    R = REFERENCE_R * gamma / REFERENCE_GAMMA
    A_sat = 0.01
    augmented = method is Method.AUGMENTED
    p = CircuitParams(
        C_s=1e-9 / (2 * math.pi),
        L_s=1e-9 / (2 * math.pi),
        C_p=0.01e-9 / (4 * math.pi),
        L_p=100e-9 / (4 * math.pi),
        C_0=0.0,
        C_N=0.1e-9 / (2 * math.pi),
        A_sat=A_sat,
        R=R,
        G_0=1.0 / R if augmented else 0.0,
        G_N=1.0 / (R * A_sat**2) if augmented else 0.0,
        T=T,
        method=method,
    )
    if Q_p is not None and math.isfinite(Q_p):
        p = p.replace(R_p=pump_resistance(Q_p, p))
    return p


def with_pump_capacitance(params: CircuitParams, C_0p: float) -> CircuitParams:
    """Change C_0p, retuning L_p so the pump stays resonant at 2*omega0."""
    C_p = C_0p - params.C_0
    L_p = 1.0 / (4 * params.omega0**2 * C_0p)
    return params.replace(C_p=C_p, L_p=L_p)


def node_losses(inst: IsingInstance, include_field: bool = True) -> np.ndarray:
    """``N_i = sum_{j != i} |J_ij| (+ |h_i| / 2)``."""
    N = inst.row_abs_sums()
    if include_field:
        N = N + 0.5 * np.abs(inst.h)
    return N


def build_connectivity(inst: IsingInstance, include_field: bool = True) -> np.ndarray:
    """Loss matrix ``X = diag(N) - J`` whose eigenvalues set the mode losses."""
    X = -inst.J.toarray()
    X[np.diag_indices(inst.n)] = node_losses(inst, include_field)
    return X


def noise_voltage(params: CircuitParams) -> float:
    """Equilibrium rms voltage ``sqrt(kT / C_0s)`` on a signal capacitor."""
    return math.sqrt(K_BOLTZMANN * params.T / params.C_0s)


def initial_pump_voltage(inst: IsingInstance, params: CircuitParams, include_field: bool = True) -> float:
    X = build_connectivity(inst, include_field)
    q = min(PUMP_EIGEN_INDEX, inst.n)
    lam_q = np.linalg.eigvalsh(X)[q - 1]
    return PUMP_GAIN_MARGIN * (lam_q / (2 * params.R) + params.G_0) / (params.C_N * params.omega0)


def initial_state(inst: IsingInstance, params: CircuitParams, rng, mode: str = "ode_uniform",
                  include_field: bool = True) -> OscillatorState:
    """Signals at the thermal noise level, pumps charged just above threshold.

    ``mode="ode_uniform"`` draws each signal from U(-V, V);
    ``mode="sde_binary"`` picks -V or +V with equal probability.
    """
    rng = np.random.default_rng(rng)
    V = noise_voltage(params)
    if mode == "ode_uniform":
        A_s = rng.uniform(-V, V, inst.n)
    elif mode == "sde_binary":
        A_s = np.where(rng.integers(0, 2, inst.n) == 1, V, -V).astype(float)
    else:
        raise ValueError(f"unknown initial-state mode {mode!r}")
    A_p = np.full(inst.n, initial_pump_voltage(inst, params, include_field))
    return OscillatorState(A_s, A_p, 0.0)


def _multiplier_offset(params: CircuitParams) -> float:
    if params.method is Method.AUGMENTED:
        return params.G_0 / 2 + 3 * params.G_N * params.A_sat**2 / 8
    return 0.0


def circuit_multipliers(state: OscillatorState, inst: IsingInstance, params: CircuitParams) -> np.ndarray:
    """Net gain conductances ``Lambda_i = C_N w0 A_p / 2 - N_i / (4R)``."""
    return params.C_N * params.omega0 * state.A_p / 2 - node_losses(inst) / (4 * params.R)


def map_to_algorithm(state: OscillatorState, inst: IsingInstance, params: CircuitParams) -> AlgorithmState:
    """Circuit amplitudes -> (spins, multipliers)."""
    Lam = circuit_multipliers(state, inst, params)
    lam = 4 * params.R * (Lam - _multiplier_offset(params))
    return AlgorithmState(state.A_s / params.A_sat, lam, state.t)


def map_from_algorithm(alg: AlgorithmState, inst: IsingInstance, params: CircuitParams) -> OscillatorState:
    """Inverse of :func:`map_to_algorithm`."""
    Lam = alg.lam / (4 * params.R) + _multiplier_offset(params)
    A_p = 2 * (Lam + node_losses(inst) / (4 * params.R)) / (params.C_N * params.omega0)
    return OscillatorState(alg.x * params.A_sat, A_p, alg.t)


def quantize_weights(inst: IsingInstance, bits=(1, -1)) -> IsingInstance:
    """Round each |J_ij| to the nearest sum of powers of two in [2^lsb, 2^msb].

    Values are rounded half-up to a multiple of ``2**lsb`` and clamped to the
    largest representable magnitude; signs and symmetry are kept.
    """
    msb, lsb = int(bits[0]), int(bits[1])
    if msb < lsb:
        raise ValueError("msb exponent must be >= lsb exponent")
    step = 2.0**lsb
    top = 2.0 ** (msb + 1) - step
    J = inst.J.copy()
    mag = np.minimum(np.floor(np.abs(J.data) / step + 0.5) * step, top)
    J.data = np.sign(J.data) * mag
    J.eliminate_zeros()
    return inst.with_couplings(J)
