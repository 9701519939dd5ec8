"""Time integrators: adaptive Dormand-Prince 4(5) and fixed-step Euler-Maruyama.

Both integrators work on flat float arrays and report progress to an
``observer(t, y, is_sample)`` callback. ``is_sample`` is true at the uniform
sampling grid ``t = k * sample_interval`` (and at ``t_end``), whose states
come from the pair's continuous extension rather than from the step sequence.
An observer that returns ``True`` stops the integration at that time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MIN_STEP = 1e-15


class IntegrationError(RuntimeError):
    def __init__(self, message: str, t: float):
        self.t = t
        super().__init__(f"{message} (t = {t:.6e} s)")


class StiffnessError(IntegrationError):
    pass


class DivergenceError(IntegrationError):
    pass


@dataclass(frozen=True)
class IntegrationConfig:
    t_end: float = 50e-6
    rel_tol: float = 1e-6
    abs_tol: float = 1e-12
    dt_sde: float = 1e-9
    sample_interval: float = 5e-8
    seed: int = 0

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.dt_sde > 0:
            raise ValueError("dt_sde must be positive")
        if self.sample_interval < self.dt_sde:
            raise ValueError("sample_interval must be >= dt_sde")

    def replace(self, **changes) -> "IntegrationConfig":
        from dataclasses import replace
        return replace(self, **changes)


@dataclass
class IntegrationOutcome:
    y: np.ndarray
    t: float
    n_accepted: int = 0
    n_rejected: int = 0
    n_eval: int = 0


# Dormand-Prince 5(4) tableau.
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# Difference between the 5th- and 4th-order weights.
E1, E3, E4, E5, E6, E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)
# Continuous extension: y(t + th*h) = y + h * sum_i K_i * (P[i] @ [th, th^2, th^3, th^4]).
DENSE_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
BETA = 0.04
EXPO = 0.2 - 0.75 * BETA
MIN_FACTOR, MAX_FACTOR = 0.2, 10.0


def _rms(v):
    return math.sqrt(float(np.mean(v * v)))


def _initial_step(rhs, t, y, f, rtol, atol, t_span, h_ref):
    """Starting step from derivative scales; ``h_ref`` (not the span) sets the fallbacks,
    so runs that differ only in ``t_end`` take identical steps."""
    scale = atol + rtol * np.abs(y)
    d0, d1 = _rms(y / scale), _rms(f / scale)
    h0 = 1e-6 * h_ref if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = rhs(t + h0, y + h0 * f)
    d2 = _rms((f1 - f) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6 * h0, 1e-3 * h_ref)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, t_span)


def dense_eval(y, h, K, theta):
    """Continuous-extension value at fraction ``theta`` of an accepted step."""
    powers = np.array([theta, theta**2, theta**3, theta**4])
    w = DENSE_P @ powers
    return y + h * np.tensordot(w, K, axes=1)


def integrate_adaptive(rhs, y0, config: IntegrationConfig, observer=None, t0: float = 0.0,
                       h0: float | None = None, max_step: float | None = None) -> IntegrationOutcome:
    """Integrate ``dy/dt = rhs(t, y)`` from ``t0`` to ``config.t_end``.

    Embedded Dormand-Prince 4(5) pair with PI step-size control and an RMS
    mixed error norm ``atol + rtol * max(|y|, |y_new|)``. The observer sees
    every accepted step plus the uniform sample grid; timestamps are strictly
    increasing and the final call is at exactly ``t_end``.

    Raises
    ------
    StiffnessError
        If the step size falls below 1e-15 s.
    DivergenceError
        If the state becomes non-finite.
    """
    t_end = float(config.t_end)
    if not t_end > t0:
        raise ValueError("t_end must exceed the start time")
    rtol, atol = config.rel_tol, config.abs_tol
    y = np.array(y0, dtype=float)
    t = float(t0)
    f = rhs(t, y)
    n_eval = 1
    if not np.all(np.isfinite(f)) or not np.all(np.isfinite(y)):
        raise DivergenceError("non-finite initial state or derivative", t)
    span = t_end - t
    max_step = span if max_step is None else max_step
    h = h0 if h0 is not None else _initial_step(rhs, t, y, f, rtol, atol, span, config.sample_interval)
    n_eval += 1
    h = min(h, max_step)

    dts = config.sample_interval
    eps_t = 1e-9 * dts
    n_samples_total = int(math.floor(span / dts + 1e-9))
    if observer is not None and observer(t, y, True):
        return IntegrationOutcome(y, t, 0, 0, n_eval)
    k_next = 1

    err_prev = 1e-4
    n_acc = n_rej = 0
    rejected_last = False
    K = np.empty((7,) + y.shape)
    while t < t_end:
        if h < MIN_STEP:
            raise StiffnessError(f"step size {h:.3e} s below minimum", t)
        last = t + h >= t_end - MIN_STEP
        if last:
            h = t_end - t
        K[0] = f
        K[1] = rhs(t + C2 * h, y + h * (A21 * f))
        K[2] = rhs(t + C3 * h, y + h * (A31 * f + A32 * K[1]))
        K[3] = rhs(t + C4 * h, y + h * (A41 * f + A42 * K[1] + A43 * K[2]))
        K[4] = rhs(t + C5 * h, y + h * (A51 * f + A52 * K[1] + A53 * K[2] + A54 * K[3]))
        K[5] = rhs(t + h, y + h * (A61 * f + A62 * K[1] + A63 * K[2] + A64 * K[3] + A65 * K[4]))
        y_new = y + h * (B1 * f + B3 * K[2] + B4 * K[3] + B5 * K[4] + B6 * K[5])
        K[6] = rhs(t + h, y_new)
        n_eval += 6
        err = h * (E1 * f + E3 * K[2] + E4 * K[3] + E5 * K[4] + E6 * K[5] + E7 * K[6])
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = _rms(err / scale)
        if not math.isfinite(err_norm) or not np.all(np.isfinite(K[6])):
            n_rej += 1
            rejected_last = True
            h *= MIN_FACTOR
            if h < MIN_STEP:
                raise DivergenceError("state became non-finite", t)
            continue
        if err_norm <= 1.0:
            t_new = t_end if last else t + h
            if observer is not None:
                while k_next <= n_samples_total and t0 + k_next * dts < t_new - eps_t:
                    ts = k_next * dts + t0
                    ys = dense_eval(y, h, K, (ts - t) / h)
                    k_next += 1
                    if observer(ts, ys, True):
                        return IntegrationOutcome(ys, ts, n_acc, n_rej, n_eval)
                on_grid = k_next <= n_samples_total and abs(k_next * dts + t0 - t_new) <= eps_t
                if on_grid:
                    k_next += 1
                if observer(t_new, y_new, on_grid or last):
                    return IntegrationOutcome(y_new, t_new, n_acc + 1, n_rej, n_eval)
            t, y, f = t_new, y_new, K[6].copy()
            n_acc += 1
            fac = SAFETY * max(err_norm, 1e-10) ** (-EXPO) * err_prev**BETA
            fac = min(MAX_FACTOR, max(MIN_FACTOR, fac))
            if rejected_last:
                fac = min(1.0, fac)
            err_prev = max(err_norm, 1e-4)
            rejected_last = False
            h = min(h * fac, max_step)
        else:
            n_rej += 1
            rejected_last = True
            h *= max(MIN_FACTOR, SAFETY * err_norm ** (-0.2))
    return IntegrationOutcome(y, t, n_acc, n_rej, n_eval)


def counter_rng(seed: int, run_index: int = 0, stream: int | None = None) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by ``(seed, run_index[, stream])``.

    ``stream`` separates independent uses within one run (initial state,
    noise increments) so that they never share draws. Streams start at 1:
    seed sequences ignore trailing zeros, so ``stream=0`` is the default stream.
    """
    key = [int(seed) & (2**64 - 1), int(run_index)]
    if stream is not None:
        key.append(int(stream))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def _diffusion_operator(diffusion, dim):
    if diffusion is None:
        return None
    if callable(diffusion) and not hasattr(diffusion, "apply"):
        return diffusion
    if hasattr(diffusion, "apply"):
        if not getattr(diffusion, "enabled", True):
            return None
        if diffusion.dim != dim:
            raise ValueError(f"noise dimension {diffusion.dim} does not match state dimension {dim}")
        apply = diffusion.apply
        return lambda t, y, dw: apply(dw)
    D = np.asarray(diffusion, dtype=float)
    if D.ndim == 0:
        return None if D == 0 else (lambda t, y, dw: D * dw)
    if D.ndim == 1:
        if D.shape[0] != dim:
            raise ValueError("diffusion vector length does not match state")
        return lambda t, y, dw: (D * dw.T).T
    if D.shape != (dim, dim):
        raise ValueError("diffusion matrix shape does not match state")
    return lambda t, y, dw: D @ dw


def integrate_em(rhs, diffusion, y0, config: IntegrationConfig, observer=None, rng=None,
                 run_index: int = 0, block: int = 256) -> IntegrationOutcome:
    """Fixed-step Euler-Maruyama: ``y <- y + f(y) dt + D(sqrt(dt) xi)``.

    ``diffusion`` is ``None``/0, a scalar, a vector (diagonal), a matrix, an
    object with ``apply(xi)`` and ``dim`` (e.g. :class:`~oscim.dynamics.NoiseModel`),
    or a callable ``g(t, y, dw)`` returning the increment for a state-dependent
    (Ito) diffusion.
    Normals come from a Philox stream keyed by ``(config.seed, run_index)``
    unless ``rng`` is given; draws are consumed in step order, so the seed
    fixes every (step, component) draw regardless of ``block``.
    """
    y = np.array(y0, dtype=float)
    dim = y.shape[0]
    dt = config.dt_sde
    n_steps = max(1, int(round(config.t_end / dt)))
    every = max(1, int(round(config.sample_interval / dt)))
    apply = _diffusion_operator(diffusion, dim)
    gen = rng if rng is not None else counter_rng(config.seed, run_index)
    sqdt = math.sqrt(dt)
    t = 0.0
    if observer is not None and observer(t, y, True):
        return IntegrationOutcome(y, t, 0, 0, 0)
    noise = None
    for step in range(1, n_steps + 1):
        drift = rhs(t, y)
        if apply is not None:
            j = (step - 1) % block
            if j == 0:
                m = min(block, n_steps - step + 1)
                noise = gen.standard_normal((m,) + y.shape)
            y = y + drift * dt + apply(t, y, noise[j] * sqdt)
        else:
            y = y + drift * dt
        t = config.t_end if step == n_steps else step * dt
        if not np.all(np.isfinite(y)):
            raise DivergenceError("state became non-finite", t)
        if observer is not None and (step % every == 0 or step == n_steps) and observer(t, y, True):
            return IntegrationOutcome(y, t, step, 0, step)
    return IntegrationOutcome(y, t, n_steps, 0, n_steps)
