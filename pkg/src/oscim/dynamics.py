"""Right-hand sides of the envelope equations and of the multiplier flow.

Signal equation for oscillator i (augmented circuit; ``G_0 = G_N = 0`` gives
the plain one)::

    dA_s/dt = -(N_i / 4RC) A_s + (1 / 4RC) sum_j J_ij A_sj + h_i A_sat / 8RC
              + (C_N w0 A_p / 2C) A_s - (G_0 / 2C) A_s - (3 G_N / 8C) A_s^3

with ``C = C_0s``. Pump equation::

    dA_p/dt = I_p / 2C_0p - A_p / (2 R_p C_0p) - (C_N w0 / 2C_0p) A_s^2

Under ``x = A_s / A_sat`` and ``lambda = 4R (Lambda - G_0/2 - 3 G_N A_sat^2 / 8)``
this is exactly the primal-dual flow of :func:`mm_rhs`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .circuit import (
    K_BOLTZMANN,
    CircuitParams,
    Method,
    circuit_multipliers,
    lagrange_params,
    node_losses,
)
from .problems import IsingInstance
from .state import AlgorithmState, OscillatorState, SingleOscState

__all__ = [
    "AlgorithmState",
    "CircuitFlow",
    "MMFlow",
    "NoiseModel",
    "OscillatorState",
    "SingleOscFlow",
    "SingleOscState",
    "algorithm_lagrangian",
    "build_noise_model",
    "circuit_rhs",
    "dual_rate",
    "lagrangian_value",
    "mm_rhs",
    "single_osc_rhs",
]

DENSE_LIMIT = 400


def _coupling_operator(inst: IsingInstance, scale: float):
    if inst.n <= DENSE_LIMIT:
        return np.asarray(inst.dense_J()) * scale
    return (inst.J * scale).tocsr()


class CircuitFlow:
    """Packed right-hand side ``y = [A_s, A_p] -> dy/dt`` for the coupled circuit.

    ``y`` may also be a 2-D array of shape (2n, m) holding m states column-wise.
    """

    def __init__(self, inst: IsingInstance, params: CircuitParams, include_field: bool = True):
        self.inst = inst
        self.params = params
        self.n = inst.n
        p = params
        rc = 4 * p.R * p.C_0s
        self.loss = node_losses(inst, include_field) / rc + p.G_0 / (2 * p.C_0s)
        self.coupling = _coupling_operator(inst, 1.0 / rc)
        self.field = inst.h * p.A_sat / (2 * rc)
        self.gain = p.C_N * p.omega0 / (2 * p.C_0s)
        self.cubic = 3 * p.G_N / (8 * p.C_0s)
        self.pump_source = p.I_p / (2 * p.C_0p)
        self.pump_loss = 0.0 if p.lossless_pump else 1.0 / (2 * p.R_p * p.C_0p)
        self.depletion = p.C_N * p.omega0 / (2 * p.C_0p)

    def split(self, dy):
        return dy[: self.n], dy[self.n:]

    def __call__(self, t, y):
        n = self.n
        a, b = y[:n], y[n:]
        if y.ndim == 1:
            loss, field = self.loss, self.field
        else:
            loss, field = self.loss[:, None], self.field[:, None]
        da = (self.gain * b - loss) * a + self.coupling @ a + field
        if self.cubic:
            da -= self.cubic * a**3
        db = self.pump_source - self.depletion * a * a
        if self.pump_loss:
            db -= self.pump_loss * b
        return np.concatenate([da, db])


def circuit_rhs(state: OscillatorState, inst: IsingInstance, params: CircuitParams):
    """Time derivatives ``(dA_s/dt, dA_p/dt)`` of the circuit envelopes."""
    dy = CircuitFlow(inst, params)(state.t, state.pack())
    return dy[: inst.n], dy[inst.n:]


def dual_rate(state: OscillatorState, inst: IsingInstance, params: CircuitParams) -> np.ndarray:
    """``dLambda/dt`` implied by the pump equation."""
    _, dAp = circuit_rhs(state, inst, params)
    return params.C_N * params.omega0 * dAp / 2


def lagrangian_value(state: OscillatorState, inst: IsingInstance, params: CircuitParams,
                     augmented: bool | None = None) -> float:
    """Circuit Lagrange function in volts^2 / ohm.

    Plain form::

        -(1/4R) sum_ij J_ij A_i A_j - (A_sat/4R) sum_i h_i A_i + sum_i Lambda_i (A_sat^2 - A_i^2)

    The augmented form adds the nonlinear-conductance terms
    ``-(G_0/2 + 3 G_N A_sat^2 / 8) sum (A_sat^2 - A_i^2) + (3 G_N / 16) sum (A_sat^2 - A_i^2)^2``.
    """
    if augmented is None:
        augmented = params.method is Method.AUGMENTED
    A = state.A_s
    R, As2 = params.R, params.A_sat**2
    Lam = circuit_multipliers(state, inst, params)
    gap = As2 - A * A
    val = -(A @ (inst.J @ A)) / (4 * R) - params.A_sat * (inst.h @ A) / (4 * R) + Lam @ gap
    if augmented:
        val += -(params.G_0 / 2 + 3 * params.G_N * As2 / 8) * gap.sum() + 3 * params.G_N / 16 * (gap @ gap)
    return float(val)


def algorithm_lagrangian(alg: AlgorithmState, inst: IsingInstance, alpha: float = 0.0) -> float:
    """``L_alpha(x, lam) = -h.x - x.J.x + lam.(1 - x^2) + (alpha/2) sum (1 - x^2)^2``."""
    x = alg.x
    g = 1 - x * x
    return float(-(inst.h @ x) - x @ (inst.J @ x) + alg.lam @ g + 0.5 * alpha * (g @ g))


def mm_rhs(state: AlgorithmState, inst: IsingInstance, kappa: float, kappa_prime: float, alpha: float = 0.0):
    """Primal descent / dual ascent on the (augmented) Ising Lagrange function."""
    x, lam = state.x, state.lam
    dx = -2 * kappa * (-(inst.J @ x) - inst.h / 2 - lam * x - alpha * x + alpha * x**3)
    dlam = kappa_prime * (1 - x * x)
    return dx, dlam


class MMFlow:
    """Packed ``y = [x, lam]`` form of :func:`mm_rhs` for the integrators."""

    def __init__(self, inst: IsingInstance, kappa: float, kappa_prime: float, alpha: float = 0.0):
        self.n = inst.n
        self.kappa, self.kappa_prime, self.alpha = kappa, kappa_prime, alpha
        self.coupling = _coupling_operator(inst, 1.0)
        self.half_h = inst.h / 2

    @classmethod
    def from_circuit(cls, inst: IsingInstance, params: CircuitParams) -> "MMFlow":
        lp = lagrange_params(params)
        return cls(inst, lp.kappa, lp.kappa_prime, lp.alpha)

    def __call__(self, t, y):
        n = self.n
        x, lam = y[:n], y[n:]
        h = self.half_h if y.ndim == 1 else self.half_h[:, None]
        a = self.alpha
        dx = 2 * self.kappa * (self.coupling @ x + h + lam * x + a * x - a * x**3)
        return np.concatenate([dx, self.kappa_prime * (1 - x * x)])


def circuit_to_algorithm_rate(state: OscillatorState, inst: IsingInstance, params: CircuitParams):
    """Image of the circuit velocity under the variable mapping (chain rule)."""
    dAs, dAp = circuit_rhs(state, inst, params)
    dx = dAs / params.A_sat
    dlam = 4 * params.R * params.C_N * params.omega0 * dAp / 2
    return dx, dlam


# --- single oscillator with sine quadrature -------------------------------


class ImplicitSolveError(RuntimeError):
    pass


class SingleOscFlow:
    """Cosine/sine signal quadratures and pump of one parametric oscillator.

    The envelope equations keep the small derivative cross terms, so every
    evaluation solves a 3x3 nonlinear system for the derivatives by Newton
    iteration, starting from the reduced (explicit) equations.
    """

    def __init__(self, params: CircuitParams, R_s: float, I_sc: float = 0.0, I_ss: float = 0.0,
                 I_pc: float | None = None, max_iter: int = 50):
        self.p = params
        self.R_s = R_s
        self.I_sc, self.I_ss = I_sc, I_ss
        self.I_pc = params.I_p if I_pc is None else I_pc
        self.max_iter = max_iter

    def __call__(self, t, y):
        return self.derivatives(y)

    def derivatives(self, y):
        p = self.p
        A, B, P = float(y[0]), float(y[1]), float(y[2])
        Cs, Cp, w = p.C_0s, p.C_0p, p.omega0
        g = p.C_N * w
        c = p.C_N / (2 * w * Cs)
        e = p.C_N / (4 * Cp * w)
        r = 1.0 / (2 * self.R_s * w * Cs)
        pl = 0.0 if p.lossless_pump else 1.0 / (2 * p.R_p * Cp)
        base1 = self.I_sc / (2 * Cs) - A / (2 * self.R_s * Cs) + g * P * A / (2 * Cs)
        base2 = self.I_ss / (2 * Cs) - B / (2 * self.R_s * Cs) - g * P * B / (2 * Cs)
        base3 = self.I_pc / (2 * Cp) - pl * P + e * 2 * w * w * (B * B - A * A)

        def residual(d):
            dA, dB, dP = d
            return np.array([
                dA - base1 - r * dB + c * (2 * dA * dP - 2 * w * dP * B - 2 * w * dB * P),
                dB - base2 + r * dA - c * (2 * dB * dP + 2 * w * dP * A + 2 * w * dA * P),
                dP - base3 - e * (dA * dA - dB * dB) - 4 * e * w * (A * dB + dA * B),
            ])

        def jacobian(d):
            dA, dB, dP = d
            return np.array([
                [1 + 2 * c * dP, -r - 2 * c * w * P, 2 * c * dA - 2 * c * w * B],
                [r - 2 * c * w * P, 1 - 2 * c * dP, -2 * c * dB - 2 * c * w * A],
                [-2 * e * dA - 4 * e * w * B, 2 * e * dB - 4 * e * w * A, 1.0],
            ])

        d = np.array([base1, base2, base3])
        scale = np.abs(d) + 1e-300
        for _ in range(self.max_iter):
            F = residual(d)
            try:
                step = np.linalg.solve(jacobian(d), F)
            except np.linalg.LinAlgError as exc:
                raise ImplicitSolveError(f"singular derivative system at state {y}") from exc
            if not np.all(np.isfinite(step)):
                raise ImplicitSolveError(f"non-finite Newton step at state {y}")
            d = d - step
            scale = np.maximum(scale, np.abs(d))
            if np.all(np.abs(step) <= 1e-13 * scale):
                return d
        raise ImplicitSolveError(f"derivative solve did not converge at state {y}")


def single_osc_rhs(state: SingleOscState, params: CircuitParams, I_sc: float = 0.0, I_ss: float = 0.0,
                   R_s: float | None = None, I_pc: float | None = None) -> SingleOscState:
    """Derivatives of (A_s, B_s, A_p) for an uncoupled parametric oscillator."""
    flow = SingleOscFlow(params, params.R if R_s is None else R_s, I_sc, I_ss, I_pc)
    d = flow.derivatives(state.pack())
    return SingleOscState(*d)


# --- thermal noise ----------------------------------------------------------


@dataclass
class NoiseModel:
    """Additive Langevin terms for the packed circuit state ``[A_s, A_p]``.

    Signal increments are ``signal_scale * Q_signal @ dW`` with
    ``Q_signal Q_signal^T = M``; each pump gets independent white noise of
    strength ``sigma_pump`` (zero for a lossless pump).
    """

    T: float
    Q_signal: np.ndarray
    sigma_pump: float
    signal_scale: float
    enabled: bool = True
    M: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.Q_signal.shape[0]

    @property
    def dim(self) -> int:
        return 2 * self.n

    def apply(self, xi):
        """Map standard normals (length 2n, or (2n, m)) to state increments per sqrt(s)."""
        n = self.n
        out = np.empty_like(xi, dtype=float)
        out[:n] = self.signal_scale * (self.Q_signal @ xi[:n])
        out[n:] = self.sigma_pump * xi[n:]
        return out


def noise_covariance(inst: IsingInstance, params: CircuitParams, include_field: bool = True) -> np.ndarray:
    """Signal noise covariance ``M`` (units V^2 s) before the ``1/4RC_0s`` scale."""
    kTR8 = 8 * K_BOLTZMANN * params.T * params.R
    M = -kTR8 * inst.J.toarray()
    internal = 2 * params.R * (params.G_0 + 9 * params.G_N * params.A_sat**2)
    M[np.diag_indices(inst.n)] = kTR8 * (internal + node_losses(inst, include_field))
    return M


def build_noise_model(inst: IsingInstance, params: CircuitParams, jitter: float = 1e-12,
                      include_field: bool = True) -> NoiseModel:
    """Johnson-noise model of the coupling resistors, signal conductance and pump loss."""
    if params.T < 0:
        raise ValueError("temperature must be non-negative")
    n = inst.n
    scale = 1.0 / (4 * params.R * params.C_0s)
    sigma_pump = 0.0 if params.lossless_pump else np.sqrt(4 * K_BOLTZMANN * params.T / params.R_p) / (2 * params.C_0p)
    M = noise_covariance(inst, params, include_field)
    if params.T == 0 or not np.any(M):
        return NoiseModel(params.T, np.zeros((n, n)), 0.0, scale, enabled=False, M=M)
    try:
        Q = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        eps = jitter * np.trace(M) / n
        try:
            Q = np.linalg.cholesky(M + eps * np.eye(n))
        except np.linalg.LinAlgError:
            worst = float(np.linalg.eigvalsh(M)[0])
            raise ValueError(f"noise covariance is not positive semidefinite (min eigenvalue {worst:.3e})") from None
    return NoiseModel(params.T, Q, float(sigma_pump), scale, enabled=True, M=M)
