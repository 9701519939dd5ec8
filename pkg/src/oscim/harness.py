"""Running the oscillator solver: single runs, repeated runs, TTS, perturbations, sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .circuit import (
    CircuitParams,
    Method,
    initial_state,
    map_to_algorithm,
    pump_resistance,
    with_pump_capacitance,
)
from .dynamics import CircuitFlow, MMFlow, build_noise_model
from .integrate import IntegrationConfig, counter_rng, integrate_adaptive, integrate_em
from .problems import IsingInstance, objective_value, spins_from_amplitudes

FLOWS = ("circuit", "reference_mm")
SWEEP_PARAMETERS = ("C_0p", "G_0", "C_N", "Q_p", "R", "t_end")


@dataclass
class RunResult:
    best_config: np.ndarray
    best_objective: float
    trace_t: np.ndarray
    trace_objective: np.ndarray
    trace_flips: np.ndarray
    seed: int
    run_index: int = 0
    t_end: float = 50e-6
    best_time: float = 0.0
    first_cross_time: float | None = None
    threshold: float | None = None
    mode: str = "ode"
    method: str = Method.AUGMENTED.value
    params: dict = field(default_factory=dict)
    final_state: np.ndarray | None = None

    @property
    def trace(self):
        return list(zip(self.trace_t.tolist(), self.trace_objective.tolist()))


def first_crossing(trace_t, trace_objective, threshold: float):
    """Earliest trace time with objective >= threshold, or None."""
    hit = np.flatnonzero(np.asarray(trace_objective) >= threshold)
    return float(trace_t[hit[0]]) if hit.size else None


class _Recorder:
    def __init__(self, readout: IsingInstance, n: int, stop_at: float | None = None):
        self.readout = readout
        self.n = n
        self.stop_at = stop_at
        self.t, self.obj, self.flips = [], [], []
        self.prev = None
        self.best = -math.inf
        self.best_cfg = None
        self.best_t = 0.0

    def __call__(self, t, y, is_sample):
        if not is_sample:
            return
        cfg = spins_from_amplitudes(y[: self.n])
        val = objective_value(self.readout, cfg)
        self.t.append(t)
        self.obj.append(val)
        self.flips.append(0 if self.prev is None else int(np.count_nonzero(cfg != self.prev)))
        self.prev = cfg
        if val > self.best:
            self.best, self.best_cfg, self.best_t = val, cfg, t
        return self.stop_at is not None and val >= self.stop_at


def solve(inst: IsingInstance, params: CircuitParams, config: IntegrationConfig | None = None,
          mode: str = "ode", *, flow: str = "circuit", run_index: int = 0,
          readout: IsingInstance | None = None, threshold: float | None = None,
          include_field: bool = True, stop_at_threshold: bool = False) -> RunResult:
    """One run from thermal-noise initial conditions.

    The configuration read out at each sample is ``sign(A_s)`` (zero -> +1);
    the run's answer is the best sampled objective. ``readout`` evaluates the
    objective on a different instance than the one wired into the circuit
    (used for conductance-error studies). ``flow="reference_mm"`` integrates
    the abstract multiplier flow from the mapped initial state instead.
    With ``stop_at_threshold`` the run ends at the first sample reaching
    ``threshold``; ``t_end`` still records the configured horizon.
    """
    config = config or IntegrationConfig()
    if flow not in FLOWS:
        raise ValueError(f"unknown flow {flow!r}; expected one of {FLOWS}")
    if mode not in ("ode", "sde"):
        raise ValueError(f"unknown mode {mode!r}")
    readout = inst if readout is None else readout
    init_rng = counter_rng(config.seed, run_index, stream=1)
    state0 = initial_state(inst, params, init_rng, "ode_uniform" if mode == "ode" else "sde_binary",
                           include_field=include_field)
    if flow == "circuit":
        rhs = CircuitFlow(inst, params, include_field)
        y0 = state0.pack()
    else:
        rhs = MMFlow.from_circuit(inst, params)
        y0 = map_to_algorithm(state0, inst, params).pack()
    if stop_at_threshold and threshold is None:
        raise ValueError("stop_at_threshold needs a threshold")
    rec = _Recorder(readout, inst.n, threshold if stop_at_threshold else None)
    if mode == "ode":
        out = integrate_adaptive(rhs, y0, config, rec)
    else:
        if flow != "circuit":
            raise ValueError("the stochastic mode is only defined for the circuit flow")
        noise = build_noise_model(inst, params, include_field=include_field)
        out = integrate_em(rhs, noise, y0, config, rec, rng=counter_rng(config.seed, run_index, stream=2))
    trace_t = np.asarray(rec.t)
    trace_obj = np.asarray(rec.obj)
    return RunResult(
        best_config=rec.best_cfg,
        best_objective=float(rec.best),
        trace_t=trace_t,
        trace_objective=trace_obj,
        trace_flips=np.asarray(rec.flips, dtype=int),
        seed=config.seed,
        run_index=run_index,
        t_end=config.t_end,
        best_time=rec.best_t,
        first_cross_time=None if threshold is None else first_crossing(trace_t, trace_obj, threshold),
        threshold=threshold,
        mode=mode,
        method=params.method.value if flow == "circuit" else "reference_mm",
        params=params.as_dict(),
        final_state=out.y,
    )


@dataclass
class MultiRunStats:
    best: float
    median: float
    p25: float
    p75: float
    results: list

    @property
    def values(self) -> np.ndarray:
        return np.array([r.best_objective for r in self.results])


def summarize(values) -> tuple:
    """(best, median, p25, p75) using lower order statistics."""
    v = np.asarray(values, dtype=float)
    return (float(v.max()),
            float(np.percentile(v, 50, method="lower")),
            float(np.percentile(v, 25, method="lower")),
            float(np.percentile(v, 75, method="lower")))


def _solve_job(args):
    inst, params, config, mode, idx, kw = args
    return solve(inst, params, config, mode, run_index=idx, **kw)


def run_many(jobs_args, jobs: int = 1) -> list:
    if jobs <= 1 or len(jobs_args) <= 1:
        return [_solve_job(a) for a in jobs_args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_solve_job, jobs_args))


def multi_run(inst: IsingInstance, params: CircuitParams, config: IntegrationConfig | None = None,
              k: int = 10, mode: str = "ode", jobs: int = 1, **solve_kw) -> MultiRunStats:
    """``k`` independently seeded runs; results are kept in run-index order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    config = config or IntegrationConfig()
    results = run_many([(inst, params, config, mode, i, solve_kw) for i in range(k)], jobs)
    return MultiRunStats(*summarize([r.best_objective for r in results]), results)


@dataclass
class TtsReport:
    threshold_fraction: float
    successes: int
    total_runs: int
    tts: float
    per_run: list

    @property
    def success_rate(self) -> float:
        return self.successes / self.total_runs if self.total_runs else 0.0


def time_to_solution(results, best_known: float, fraction: float = 0.97) -> TtsReport:
    """Total simulated time over all runs divided by the number of successes.

    A run succeeds when its trace reaches ``fraction * best_known``; its
    contribution is the first crossing time, or ``t_end`` if it never crossed.
    """
    if not best_known > 0:
        raise ValueError("best_known must be positive")
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    target = fraction * best_known
    per_run, successes = [], 0
    for r in results:
        t_cross = first_crossing(r.trace_t, r.trace_objective, target)
        if t_cross is None:
            per_run.append(r.t_end)
        else:
            successes += 1
            per_run.append(t_cross)
    tts = math.fsum(per_run) / successes if successes else math.inf
    return TtsReport(fraction, successes, len(per_run), tts, per_run)


def fit_tts_scaling(sizes, tts_seconds, frequency_hz: float = 1e9):
    """Least-squares fit ``log10(cycles) = a + sqrt(N) / d``; returns (a, 1/d, d)."""
    x = np.sqrt(np.asarray(sizes, dtype=float))
    yv = np.log10(np.asarray(tts_seconds, dtype=float) * frequency_hz)
    slope, intercept = np.polyfit(x, yv, 1)
    return float(intercept), float(slope), float(1.0 / slope) if slope else math.inf


def perturb_conductances(inst: IsingInstance, sigma_pct: float, rng) -> IsingInstance:
    """Scale each coupling magnitude by ``max(0, 1 + N(0, sigma_pct/100))``.

    One factor per unordered pair, mirrored; signs and the stored sparsity
    pattern are kept (clamped entries stay as explicit zeros).
    """
    if sigma_pct < 0:
        raise ValueError("sigma_pct must be non-negative")
    rng = np.random.default_rng(rng)
    if sigma_pct == 0:
        return inst
    upper = sp.triu(inst.J, k=1).tocoo()
    factors = np.maximum(0.0, 1.0 + rng.normal(0.0, sigma_pct / 100.0, upper.nnz))
    vals = upper.data * factors
    J = sp.csr_matrix((np.concatenate([vals, vals]),
                       (np.concatenate([upper.row, upper.col]), np.concatenate([upper.col, upper.row]))),
                      shape=inst.J.shape)
    J.sort_indices()
    return inst.with_couplings(J)


@dataclass
class RobustnessReport:
    sigma_pct: float
    nominal: MultiRunStats
    perturbed_values: np.ndarray

    @property
    def perturbed_median(self) -> float:
        return summarize(self.perturbed_values)[1]

    @property
    def relative_quality(self) -> float:
        return self.perturbed_median / self.nominal.median


def conductance_study(inst: IsingInstance, params: CircuitParams, config: IntegrationConfig | None = None,
                      sigma_pct: float = 10.0, samples: int = 10, seed: int = 0, jobs: int = 1) -> RobustnessReport:
    """Solve ``samples`` randomly mis-programmed circuits, scoring on the true instance.

    The circuit keeps the nominal design parameters; only its conductances
    differ. The nominal baseline uses ``samples`` runs on the exact circuit.
    """
    config = config or IntegrationConfig(seed=seed)
    nominal = multi_run(inst, params, config, samples, jobs=jobs)
    rng = counter_rng(seed, 0, stream=3)
    args = []
    for i in range(samples):
        pert = perturb_conductances(inst, sigma_pct, rng)
        args.append((pert, params, config, "ode", i, {"readout": inst}))
    values = np.array([r.best_objective for r in run_many(args, jobs)])
    return RobustnessReport(sigma_pct, nominal, values)


@dataclass
class SweepRow:
    value: float
    best: float
    median: float
    p25: float
    p75: float


def _apply_sweep(params: CircuitParams, config: IntegrationConfig, name: str, value: float):
    if name == "C_0p":
        return with_pump_capacitance(params, value), config
    if name == "G_0":
        return params.replace(G_0=value, G_N=value / params.A_sat**2), config
    if name == "C_N":
        return params.replace(C_N=value), config
    if name == "Q_p":
        R_p = math.inf if math.isinf(value) else pump_resistance(value, params)
        return params.replace(R_p=R_p), config
    if name == "R":
        return params.replace(R=value), config
    if name == "t_end":
        return params, config.replace(t_end=value)
    raise ValueError(f"unknown sweep parameter {name!r}; expected one of {SWEEP_PARAMETERS}")


def sweep(inst: IsingInstance, base_params: CircuitParams, param_name: str, values, k: int = 10,
          config: IntegrationConfig | None = None, mode: str = "ode", jobs: int = 1) -> list:
    """:func:`multi_run` at each value of one parameter."""
    if param_name not in SWEEP_PARAMETERS:
        raise ValueError(f"unknown sweep parameter {param_name!r}; expected one of {SWEEP_PARAMETERS}")
    config = config or IntegrationConfig()
    rows = []
    for v in values:
        p, c = _apply_sweep(base_params, config, param_name, float(v))
        st = multi_run(inst, p, c, k, mode=mode, jobs=jobs)
        rows.append(SweepRow(float(v), st.best, st.median, st.p25, st.p75))
    return rows
