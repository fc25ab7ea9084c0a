"""Global calibration of LPPL parameters with a real-coded genetic algorithm.

The search runs over the full 7-dimensional parameter space: tournament
selection, blend crossover, per-gene Gaussian mutation with a decaying
step size, elitist replacement.  The oscillating term makes the objective
surface highly multimodal, so no assumption is made about its shape;
infeasible individuals simply score +inf.  By default the GA output is
refined with a bounded Nelder-Mead step, which supplies the final few
digits the population search is too coarse to deliver.

An optional mode cuts the genome to the four nonlinear parameters and
solves (A, B, C) by linear least squares per candidate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
import scipy.optimize

from .errors import ConfigError, DataError, DomainError
from .model import LpplParams, TimeSeries, Window, rmse, sse

__all__ = [
    "GaConfig",
    "SearchBounds",
    "FitResult",
    "GaRunInfo",
    "run_ga",
    "calibrate_window",
    "local_polish",
    "MIN_FIT_LENGTH",
]

# Blend (BLX-alpha) crossover width and the per-generation mutation decay.
BLEND_ALPHA = 0.5
SIGMA_DECAY = 0.99

# The phase gene is periodic; out-of-box values wrap by 2*pi before clamping.
_PHI = 5
_TWO_PI = 2.0 * math.pi

# A window must carry more points than the model has free parameters.
MIN_FIT_LENGTH = 8

# Oversampling factor for the least-squares-informed initial population.
INIT_OVERSAMPLE = 5

# Iteration budget for one Nelder-Mead polish pass.
POLISH_MAX_ITER = 3000


@dataclass(frozen=True)
class GaConfig:
    """Genetic algorithm settings.

    ``mutation_sigma`` is a fraction of each parameter's bound width; the
    effective step decays by x0.99 each generation.  The run stops early
    once the best objective has improved by less than ``stall_tolerance``
    (relative) for ``stall_generations`` consecutive generations.
    """

    population_size: int = 200
    max_generations: int = 500
    tournament_size: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float = 0.15
    mutation_sigma: float = 0.1
    elite_count: int = 2
    stall_generations: int = 50
    stall_tolerance: float = 1e-8
    seed: int = 0

    def validate(self) -> None:
        if self.population_size < self.elite_count + 2:
            raise ConfigError(
                f"population_size ({self.population_size}) must be >= elite_count + 2"
            )
        if self.tournament_size < 1:
            raise ConfigError(f"tournament_size must be >= 1, got {self.tournament_size}")
        if self.elite_count < 0:
            raise ConfigError(f"elite_count must be >= 0, got {self.elite_count}")
        if self.max_generations < 1:
            raise ConfigError(f"max_generations must be >= 1, got {self.max_generations}")
        for name in ("crossover_rate", "mutation_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {v}")
        if self.mutation_sigma <= 0:
            raise ConfigError(f"mutation_sigma must be > 0, got {self.mutation_sigma}")
        if self.stall_generations < 1:
            raise ConfigError(f"stall_generations must be >= 1, got {self.stall_generations}")
        if self.stall_tolerance < 0:
            raise ConfigError(f"stall_tolerance must be >= 0, got {self.stall_tolerance}")
        if self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed}")


@dataclass(frozen=True)
class SearchBounds:
    """Lower/upper search bounds per parameter.

    ``t_c`` is bounded through ``tc_offset``: offsets (in index units)
    relative to the last observation of the fitted window, so the critical
    time always lies strictly after the window.  Two fields are
    data-dependent and may be left open to be derived per window: ``a``
    (from the spread of window values) and the upper ``tc_offset``
    (defaulting to half the window length).

    The search box is deliberately wider than the acceptance constraints
    (0.1 < m < 0.9, 6 < omega < 13, |C| < 1) so that fits pinned at a
    search bound are rejected by the filter instead of masquerading as
    valid signals.
    """

    a: tuple[float, float] | None = None
    b: tuple[float, float] = (-10.0, 10.0)
    c: tuple[float, float] = (-2.0, 2.0)
    m: tuple[float, float] = (0.05, 0.95)
    omega: tuple[float, float] = (4.0, 16.0)
    phi: tuple[float, float] = (0.0, _TWO_PI)
    tc_offset: tuple[float, float | None] = (0.01, None)

    def validate(self) -> None:
        for name in ("a", "b", "c", "m", "omega", "phi", "tc_offset"):
            pair = getattr(self, name)
            if pair is None:
                continue
            lo, hi = pair
            if hi is not None and not lo < hi:
                raise ConfigError(f"bounds for {name} must satisfy lower < upper, got {pair}")
        if self.tc_offset is not None and self.tc_offset[0] <= 0:
            raise ConfigError(
                f"t_c lower offset must be > 0 (critical time strictly after the "
                f"window), got {self.tc_offset[0]}"
            )

    def with_window_defaults(self, window_values: np.ndarray, window_length: int) -> "SearchBounds":
        """Fill the data-dependent fields for a concrete window."""
        self.validate()
        a = self.a
        if a is None:
            lo, hi = float(np.min(window_values)), float(np.max(window_values))
            spread = max(hi - lo, 1e-6)
            a = (lo - 2.0 * spread, hi + 2.0 * spread)
        tc = self.tc_offset if self.tc_offset is not None else (0.01, None)
        if tc[1] is None:
            tc = (tc[0], 0.5 * window_length)
        out = replace(self, a=a, tc_offset=tc)
        out.validate()
        return out

    def as_arrays(self, window_end_time: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
        """Concrete (lower, upper) 7-vectors with t_c made absolute."""
        self.validate()
        if self.a is None or self.tc_offset is None or self.tc_offset[1] is None:
            raise ConfigError(
                "bounds still hold data-dependent fields; call with_window_defaults first"
            )
        lower = np.array([self.a[0], self.b[0], self.c[0], self.m[0], self.omega[0],
                          self.phi[0], window_end_time + self.tc_offset[0]])
        upper = np.array([self.a[1], self.b[1], self.c[1], self.m[1], self.omega[1],
                          self.phi[1], window_end_time + self.tc_offset[1]])
        return lower, upper


@dataclass(frozen=True)
class GaRunInfo:
    """Convergence metadata for one GA run.

    ``leaders`` holds the best few parameter-space-distinct survivors
    (genome tuples, best first); they seed the local refinement, which is
    noticeably more reliable when started from more than one basin.
    """

    generations_run: int
    objective_evaluations: int
    converged: bool
    stop_reason: str
    best_per_generation: tuple[float, ...]
    leaders: tuple[tuple[float, ...], ...] = ()


@dataclass(frozen=True)
class FitResult:
    """One calibrated window: parameters, objective and metadata."""

    params: LpplParams
    sse: float
    rmse: float
    generations_run: int
    objective_evaluations: int
    converged: bool
    window: Window
    accepted: bool = False
    rejection_reasons: tuple[str, ...] = ()


def _batch_objective_from_scalar(objective: Callable[[LpplParams], float]) -> Callable:
    def evaluate(pop: np.ndarray) -> np.ndarray:
        out = np.empty(len(pop))
        for i, row in enumerate(pop):
            try:
                out[i] = float(objective(LpplParams.from_array(row)))
            except DomainError:
                out[i] = np.inf
        out[np.isnan(out)] = np.inf
        return out

    return evaluate


def _clamp(pop: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    pop[:, _PHI] = lower[_PHI] + np.mod(pop[:, _PHI] - lower[_PHI], _TWO_PI)
    np.clip(pop, lower, upper, out=pop)
    return pop


def run_ga(
    objective: Callable[[LpplParams], float],
    bounds: SearchBounds,
    config: GaConfig,
    *,
    window_end_time: float = 0.0,
    vector_objective: Callable[[np.ndarray], np.ndarray] | None = None,
    initializer: Callable[[np.random.Generator, np.ndarray, np.ndarray], np.ndarray] | None = None,
) -> tuple[LpplParams, float, GaRunInfo]:
    """Minimize ``objective`` over the bounded parameter box.

    Deterministic given (objective, bounds, config): all randomness comes
    from a generator seeded with ``config.seed``.  Out-of-domain
    evaluations score +inf and can never be returned as the best point.

    ``vector_objective``, when given, evaluates a (k, 7) population matrix
    in one call and is used instead of per-individual calls.
    ``initializer`` may propose the starting candidates (any number of
    rows >= the population size; the best rows survive); the default is a
    uniform draw over the box.  Replacement is elitist: parents and
    children compete and the best ``population_size`` individuals survive,
    so the best-so-far objective is non-increasing by construction.
    """
    config.validate()
    lower, upper = bounds.as_arrays(window_end_time)
    width = upper - lower
    evaluate = vector_objective if vector_objective is not None else \
        _batch_objective_from_scalar(objective)

    rng = np.random.default_rng(config.seed)
    pop_size = config.population_size
    n_children = pop_size - config.elite_count
    n_pairs = (n_children + 1) // 2

    if initializer is not None:
        candidates = np.array(initializer(rng, lower, upper), dtype=float, copy=True)
        if candidates.ndim != 2 or candidates.shape[1] != 7 or len(candidates) < pop_size:
            raise ConfigError(
                f"initializer must return at least {pop_size} rows of 7 genes, "
                f"got shape {candidates.shape}"
            )
        candidates = _clamp(candidates, lower, upper)
    else:
        candidates = lower + rng.random((pop_size, 7)) * width
    cand_fitness = evaluate(candidates)
    evaluations = len(candidates)
    order = np.argsort(cand_fitness, kind="stable")[:pop_size]
    pop = candidates[order]
    fitness = cand_fitness[order]

    best_x = pop[0].copy()
    best_f = float(fitness[0])
    history = [best_f]

    generations = 0
    stall = 0
    stop_reason = "max_generations"
    for gen in range(1, config.max_generations + 1):
        sigma = config.mutation_sigma * (SIGMA_DECAY ** (gen - 1)) * width

        # tournament selection of two parents per pair of children
        cand = rng.integers(0, pop_size, size=(2 * n_pairs, config.tournament_size))
        winners = cand[np.arange(2 * n_pairs), np.argmin(fitness[cand], axis=1)]
        pa = pop[winners[:n_pairs]]
        pb = pop[winners[n_pairs:]]

        # blend crossover: two children per pair, each gene sampled uniformly
        # in the parent span widened by alpha on both sides
        do_cx = rng.random(n_pairs) < config.crossover_rate
        span = np.abs(pa - pb)
        low = np.minimum(pa, pb) - BLEND_ALPHA * span
        box = (1.0 + 2.0 * BLEND_ALPHA) * span
        child_a = low + rng.random((n_pairs, 7)) * box
        child_b = low + rng.random((n_pairs, 7)) * box
        child_a = np.where(do_cx[:, None], child_a, pa)
        child_b = np.where(do_cx[:, None], child_b, pb)
        children = np.concatenate([child_a, child_b])[:n_children]

        # per-gene Gaussian mutation with decayed step, then clamp to bounds
        mutate = rng.random((n_children, 7)) < config.mutation_rate
        steps = rng.standard_normal((n_children, 7)) * sigma
        children = np.where(mutate, children + steps, children)
        children = _clamp(children, lower, upper)

        child_fitness = evaluate(children)
        evaluations += n_children

        # elitist replacement: parents and children compete for survival
        merged = np.concatenate([pop, children])
        merged_fitness = np.concatenate([fitness, child_fitness])
        order = np.argsort(merged_fitness, kind="stable")[:pop_size]
        pop = merged[order]
        fitness = merged_fitness[order]
        generations = gen

        new_best = float(fitness[0])
        if new_best < best_f:
            improvement = (best_f - new_best) / max(abs(best_f), 1e-300)
            best_f = new_best
            best_x = pop[0].copy()
            stall = 0 if improvement >= config.stall_tolerance else stall + 1
        else:
            stall += 1
        history.append(best_f)

        if stall >= config.stall_generations:
            stop_reason = "stalled"
            break

    info = GaRunInfo(
        generations_run=generations,
        objective_evaluations=evaluations,
        converged=stop_reason == "stalled",
        stop_reason=stop_reason,
        best_per_generation=tuple(history),
        leaders=_distinct_leaders(pop, fitness, width),
    )
    return LpplParams.from_array(best_x), best_f, info


def _distinct_leaders(pop: np.ndarray, fitness: np.ndarray, width: np.ndarray,
                      count: int = 3) -> tuple[tuple[float, ...], ...]:
    """Best survivors that differ meaningfully in parameter space."""
    scale = np.maximum(width, 1e-12)
    leaders: list[np.ndarray] = []
    for idx in np.argsort(fitness, kind="stable"):
        if not np.isfinite(fitness[idx]):
            break
        row = pop[idx]
        if all(np.max(np.abs(row - kept) / scale) > 0.01 for kept in leaders) or not leaders:
            leaders.append(row)
        if len(leaders) == count:
            break
    return tuple(tuple(float(v) for v in row) for row in leaders)


def _batch_sse(pop: np.ndarray, times: np.ndarray, values: np.ndarray) -> np.ndarray:
    """SSE of every population row against the window, +inf when infeasible."""
    tc = pop[:, 6]
    tau = tc[:, None] - times[None, :]
    feasible = np.all(tau > 0, axis=1)
    out = np.full(len(pop), np.inf)
    if not np.any(feasible):
        return out
    rows = pop[feasible]
    lntau = np.log(tau[feasible])
    power = np.exp(rows[:, 3:4] * lntau)
    osc = np.cos(rows[:, 4:5] * lntau + rows[:, 5:6])
    fitted = rows[:, 0:1] + power * (rows[:, 1:2] + rows[:, 2:3] * osc)
    residuals = fitted - values[None, :]
    val = np.einsum("ij,ij->i", residuals, residuals)
    val[np.isnan(val)] = np.inf
    out[feasible] = val
    return out


def _solve_linear_terms(
    nonlinear: np.ndarray, times: np.ndarray, values: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares (A, B, C) for each (m, omega, phi, t_c) row.

    Returns the solved coefficients and the SSE they achieve; rows whose
    t_c is infeasible come back as NaN coefficients with +inf SSE.
    """
    m, omega, phi, tc = (nonlinear[:, i] for i in range(4))
    tau = tc[:, None] - times[None, :]
    feasible = np.all(tau > 0, axis=1)
    coeffs = np.full((len(nonlinear), 3), np.nan)
    sse_out = np.full(len(nonlinear), np.inf)
    if not np.any(feasible):
        return coeffs, sse_out

    lntau = np.log(tau[feasible])
    power = np.exp(m[feasible, None] * lntau)
    osc = power * np.cos(omega[feasible, None] * lntau + phi[feasible, None])
    ones = np.ones_like(power)
    basis = np.stack([ones, power, osc], axis=2)  # (k, N, 3)

    gram = np.einsum("knc,knd->kcd", basis, basis)
    # tiny ridge keeps near-degenerate bases (e.g. m ~ 0) solvable
    gram += 1e-10 * np.eye(3)[None, :, :]
    rhs = np.einsum("knc,n->kc", basis, values)
    try:
        sol = np.linalg.solve(gram, rhs[:, :, None])[:, :, 0]
    except np.linalg.LinAlgError:
        return coeffs, sse_out

    fitted = np.einsum("knc,kc->kn", basis, sol)
    residuals = fitted - values[None, :]
    val = np.einsum("ij,ij->i", residuals, residuals)
    val[~np.isfinite(val)] = np.inf
    coeffs[feasible] = sol
    sse_out[feasible] = val
    return coeffs, sse_out


def _seeded_initializer(times: np.ndarray, values: np.ndarray, pop_size: int) -> Callable:
    """Initial candidates with (A, B, C) started at their conditional optimum.

    Draws an oversampled uniform population, replaces the linear genes of
    each candidate with the least-squares solution given its nonlinear
    genes, and lets the GA keep the best rows.  All seven genes evolve
    freely afterwards; this only improves where the search starts.
    """

    def initializer(rng: np.random.Generator, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
        n = INIT_OVERSAMPLE * pop_size
        candidates = lower + rng.random((n, 7)) * (upper - lower)
        coeffs, _ = _solve_linear_terms(candidates[:, 3:7], times, values)
        solved = np.all(np.isfinite(coeffs), axis=1)
        candidates[solved, 0:3] = np.clip(coeffs[solved], lower[None, :3], upper[None, :3])
        return candidates

    return initializer


def calibrate_window(
    series: TimeSeries,
    window: Window,
    bounds: SearchBounds | None = None,
    config: GaConfig | None = None,
    *,
    polish: bool = True,
    linear_solve: bool = False,
) -> FitResult:
    """Fit the LPPL model to one window of the series.

    The GA locates the global basin; unless ``polish`` is disabled, a
    bounded Nelder-Mead pass then refines the optimum (it never returns a
    worse point than the GA's).  With ``linear_solve`` the GA explores only
    (m, omega, phi, t_c) and the linear terms are solved per candidate;
    candidates whose solved (A, B, C) leave the search bounds are
    penalized, so the returned parameters respect the bounds either way.
    """
    if window.length < MIN_FIT_LENGTH:
        raise DataError(
            f"window {window} too short: {window.length} points, need >= {MIN_FIT_LENGTH}"
        )
    t_w, v_w = series.window(window)
    window_end_time = float(t_w[-1])

    concrete = (bounds or SearchBounds()).with_window_defaults(v_w, window.length)
    config = config or GaConfig()

    def scalar_objective(params: LpplParams) -> float:
        return sse(params, series, window)

    if linear_solve:
        lower, upper = concrete.as_arrays(window_end_time)

        def vector_objective(pop: np.ndarray) -> np.ndarray:
            coeffs, values = _solve_linear_terms(pop[:, 3:7], t_w, v_w)
            inside = np.all((coeffs >= lower[None, :3]) & (coeffs <= upper[None, :3]), axis=1)
            return np.where(inside, values, np.inf)

    else:

        def vector_objective(pop: np.ndarray) -> np.ndarray:
            return _batch_sse(pop, t_w, v_w)

    params, _, info = run_ga(
        scalar_objective,
        concrete,
        config,
        window_end_time=window_end_time,
        vector_objective=vector_objective,
        initializer=_seeded_initializer(t_w, v_w, config.population_size),
    )
    evaluations = info.objective_evaluations

    if linear_solve:
        coeffs, _ = _solve_linear_terms(params.as_array()[None, 3:7], t_w, v_w)
        if np.all(np.isfinite(coeffs)):
            params = replace(params, A=float(coeffs[0, 0]), B=float(coeffs[0, 1]),
                             C=float(coeffs[0, 2]))

    if polish:

        def objective(x: np.ndarray) -> float:
            return float(_batch_sse(x[None, :], t_w, v_w)[0])

        starts = [params]
        if not linear_solve:
            starts += [LpplParams.from_array(np.array(row)) for row in info.leaders[1:]]
        best_params, best_value = params, sse(params, series, window)
        for start in starts:
            candidate, value, polish_evals = _polish_vector(
                start, objective, concrete, window_end_time
            )
            evaluations += polish_evals
            if value < best_value:
                best_params, best_value = candidate, value
        params = best_params

    final_sse = sse(params, series, window)
    return FitResult(
        params=params,
        sse=final_sse,
        rmse=rmse(final_sse, window.length),
        generations_run=info.generations_run,
        objective_evaluations=evaluations,
        converged=info.converged,
        window=window,
    )


def _polish_vector(
    start: LpplParams,
    objective: Callable[[np.ndarray], float],
    bounds: SearchBounds,
    window_end_time: float,
    max_iterations: int | None = None,
) -> tuple[LpplParams, float, int]:
    """Bounded Nelder-Mead descent on a raw parameter vector.

    Runs one pass plus a restart from its endpoint (a fresh simplex often
    escapes the degenerate shapes the first pass collapses into).
    """
    lower, upper = bounds.as_arrays(window_end_time)
    x0 = np.clip(start.as_array(), lower, upper)
    budget = max_iterations or POLISH_MAX_ITER

    def penalized(x: np.ndarray) -> float:
        if np.any(x < lower) or np.any(x > upper):
            return np.inf
        v = float(objective(x))
        return v if not math.isnan(v) else np.inf

    f0 = penalized(x0)
    best_x, best_f = x0, f0
    evaluations = 1
    x_start = x0
    for _ in range(2):
        result = scipy.optimize.minimize(
            penalized,
            x_start,
            method="Nelder-Mead",
            bounds=scipy.optimize.Bounds(lower, upper),
            options={"maxiter": budget, "xatol": 1e-10, "fatol": 1e-14, "adaptive": True},
        )
        evaluations += result.nfev
        if np.all(np.isfinite(result.x)):
            x = np.clip(result.x, lower, upper)
            fx = penalized(x)
            evaluations += 1
            if fx < best_f:
                best_x, best_f = x, fx
        x_start = best_x
    return LpplParams.from_array(best_x), float(best_f), evaluations


def local_polish(
    start: LpplParams,
    objective: Callable[[LpplParams], float],
    bounds: SearchBounds,
    *,
    window_end_time: float = 0.0,
    max_iterations: int | None = None,
) -> tuple[LpplParams, float]:
    """Nelder-Mead refinement from ``start``, clamped to the search bounds.

    Never returns a point worse than the start; if the simplex fails to
    improve, the start is returned unchanged.
    """

    def vector_objective(x: np.ndarray) -> float:
        try:
            return float(objective(LpplParams.from_array(x)))
        except DomainError:
            return np.inf

    params, value, _ = _polish_vector(start, vector_objective, bounds,
                                      window_end_time, max_iterations)
    return params, value
