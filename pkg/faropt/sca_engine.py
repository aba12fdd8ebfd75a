"""
SCA Engine
Successive convex approximation for the location of port A with port B fixed.

Each outer iteration expands the slack rates q and slack SNRs u at the
current point, builds the convex subproblem (concave surrogate objective,
linearized SNR constraint) and maximizes it with a feasible-start projected
gradient method. For a given port-A point the optimal slacks of the
subproblem are available in closed form, so the first-order method only
moves (y1, z1); the reduced objective stays concave because it is a partial
maximization of a jointly concave problem.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config import SolverConfig
from .errors import SolverError
from .model import (
    PortPlacement,
    Scenario,
    dist_port_b_to_bs,
    effective_lengths,
    gain_from_length,
    spectral_efficiencies,
)

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)
ARMIJO_SLOPE = 1e-4


class Termination(str, Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max-iterations"
    INFEASIBLE_START = "infeasible-start"


@dataclass(frozen=True)
class ScaState:
    """
    One SCA iterate.

    `q` and `u` are the slack rates and SNRs; for the best-user objective
    q[k] is the square-root variable (q_k^2 <= log2(1 + u_k)). `k` is None
    for the equal-share objective.
    """

    iterate_index: int
    y1: float
    z1: float
    q: np.ndarray
    u: np.ndarray
    surrogate_value: float
    true_objective: float
    k: Optional[int]
    y2: float
    z2: float
    inner_iterations: int = 0


@dataclass
class ScaTrace:
    """Iterate history of one SCA run."""

    states: List[ScaState] = field(default_factory=list)
    termination: Termination = Termination.CONVERGED

    @property
    def final(self) -> ScaState:
        return self.states[-1]

    @property
    def iterations(self) -> int:
        return max(len(self.states) - 1, 0)

    def objectives(self) -> np.ndarray:
        return np.array([s.true_objective for s in self.states])

    def surrogates(self) -> np.ndarray:
        return np.array([s.surrogate_value for s in self.states])

    def summary(self) -> dict:
        return {
            "termination": self.termination.value,
            "iterations": self.iterations,
            "final_objective": float(self.final.true_objective) if self.states else None,
        }


class PortAGeometry:
    """Per-user constants of the effective path length with port B fixed."""

    def __init__(self, scenario: Scenario, y2: float, z2: float):
        positions = scenario.user_positions()
        self.ux2 = np.square(positions[:, 0])
        self.uy = positions[:, 1]
        self.wall2 = scenario.wall_width ** 2
        self.medium = scenario.medium_factor
        self.alpha = scenario.path_loss_exp
        self.y2 = float(y2)
        self.z2 = float(z2)
        self.d3 = float(dist_port_b_to_bs(scenario, y2, z2))
        # sigma^2 / (p_n rho0): SNR_n = 1 / (kappa_n L_n^alpha)
        self.kappa = scenario.noise_power / (scenario.tx_powers() * scenario.ref_gain)

    def lengths(self, y1: float, z1: float) -> Tuple[np.ndarray, np.ndarray]:
        """Effective lengths L_n and their gradients w.r.t. (y1, z1), shape (N, 2)."""
        dy1 = y1 - self.uy
        d1 = np.sqrt(self.ux2 + dy1 * dy1 + z1 * z1)
        dy2 = y1 - self.y2
        dz2 = z1 - self.z2
        d2 = math.sqrt(self.wall2 + dy2 * dy2 + dz2 * dz2)
        lengths = d1 + d2 / self.medium + self.d3

        # d1 is not differentiable where the user sits under port A; use 0 there
        safe = np.where(d1 > 0, d1, 1.0)
        grad = np.empty((d1.size, 2))
        grad[:, 0] = np.where(d1 > 0, dy1 / safe, 0.0) + dy2 / (self.medium * d2)
        grad[:, 1] = np.where(d1 > 0, z1 / safe, 0.0) + dz2 / (self.medium * d2)
        return lengths, grad

    def snr_bounds(self, y1: float, z1: float, u_expansion: np.ndarray):
        """
        Largest slack SNRs allowed by the linearized constraint at (y1, z1):
        kappa L^alpha <= 1/u_t - (u - u_t)/u_t^2  <=>  u <= 2 u_t - u_t^2 kappa L^alpha.
        """
        lengths, grad = self.lengths(y1, z1)
        lhs = self.kappa * np.power(lengths, self.alpha)
        dlhs = (self.kappa * self.alpha * np.power(lengths, self.alpha - 1.0))[:, None] * grad
        u_sq = u_expansion * u_expansion
        u_bar = 2.0 * u_expansion - u_sq * lhs
        du_bar = -u_sq[:, None] * dlhs
        return u_bar, du_bar


@dataclass(frozen=True)
class SurrogatePoint:
    value: float
    grad: np.ndarray
    q: np.ndarray
    u: np.ndarray


class BestUserSurrogate:
    """
    Convex subproblem for the hypothesis that user k absorbs the surplus bandwidth,
    reduced to (y1, z1).

    For n != k the optimal q_n is log2(1 + u_n) with u_n at its linearized
    bound; q_k maximizes the concave quadratic 2 B q_k^t q_k - S q_k^2 under
    q_k^2 <= log2(1 + u_k), where S = sum_{n != k} R_n / q_n.
    """

    def __init__(self, geometry: PortAGeometry, expansion: ScaState, bandwidth: float, rates: np.ndarray):
        self.geometry = geometry
        self.k = expansion.k
        self.u_t = np.asarray(expansion.u, dtype=float)
        self.qk_t = float(expansion.q[self.k])
        self.bandwidth = bandwidth
        self.rates = np.asarray(rates, dtype=float)
        self.others = np.arange(self.rates.size) != self.k
        self.scale = bandwidth

    def evaluate(self, y1: float, z1: float) -> Optional[SurrogatePoint]:
        k = self.k
        u_bar, du_bar = self.geometry.snr_bounds(y1, z1, self.u_t)
        if u_bar[k] <= 0 or np.any(u_bar[self.others] <= 0):
            return None

        log_term = np.log2(1.0 + u_bar)
        dlog = du_bar / ((1.0 + u_bar) * LN2)[:, None]

        q_others = log_term[self.others]
        rates = self.rates[self.others]
        pinned = float(np.sum(rates / q_others))
        if pinned > self.bandwidth:
            return None
        dpinned = -np.sum((rates / (q_others * q_others))[:, None] * dlog[self.others], axis=0)

        b, qt = self.bandwidth, self.qk_t
        cap_sq = float(log_term[k])
        cap = math.sqrt(cap_sq)
        if pinned > 0 and b * qt / pinned <= cap:
            qk = b * qt / pinned
            value = b * qt * qt * (b / pinned - 1.0)
            grad = -(b * b * qt * qt / (pinned * pinned)) * dpinned
        else:
            qk = cap
            dcap = dlog[k] / (2.0 * cap)
            value = b * qt * qt + 2.0 * b * qt * (cap - qt) - pinned * cap_sq
            grad = 2.0 * b * qt * dcap - cap_sq * dpinned - pinned * dlog[k]

        q = log_term.copy()
        q[k] = qk
        return SurrogatePoint(value=float(value), grad=grad, q=q, u=u_bar)


class EqualShareSurrogate:
    """
    Convex subproblem for a frozen equal split: maximize sum (B/N) log2(1 + u_n)
    under the same linearized SNR constraint, reduced to (y1, z1).
    """

    def __init__(self, geometry: PortAGeometry, expansion: ScaState, bandwidth: float, n_users: int):
        self.geometry = geometry
        self.u_t = np.asarray(expansion.u, dtype=float)
        self.share = bandwidth / n_users
        self.scale = bandwidth

    def evaluate(self, y1: float, z1: float) -> Optional[SurrogatePoint]:
        u_bar, du_bar = self.geometry.snr_bounds(y1, z1, self.u_t)
        if np.any(u_bar < 0):
            return None
        log_term = np.log2(1.0 + u_bar)
        dlog = du_bar / ((1.0 + u_bar) * LN2)[:, None]
        value = self.share * float(np.sum(log_term))
        grad = self.share * np.sum(dlog, axis=0)
        return SurrogatePoint(value=value, grad=grad, q=log_term, u=u_bar)


def maximize_on_box(
    surrogate,
    start: Tuple[float, float],
    y_bounds: Tuple[float, float],
    z_bounds: Tuple[float, float],
    tolerance: float,
    max_iterations: int,
) -> Tuple[np.ndarray, SurrogatePoint, int]:
    """
    Feasible-start projected gradient ascent with Barzilai-Borwein steps and
    Armijo backtracking.

    Points outside the surrogate's domain evaluate to None and are rejected
    by the line search, so iterates never leave the feasible set. Stops when
    the unit-step projected gradient ||P(x + g) - x|| of the objective scaled
    by `surrogate.scale` falls below `tolerance`.
    A line search that can no longer move returns the current point and
    logs a warning when its certificate is above `tolerance`.

    Returns:
        (point, evaluation at point, iterations used)

    Raises:
        SolverError: If the start is infeasible or the iteration cap is hit
    """
    lo = np.array([y_bounds[0], z_bounds[0]], dtype=float)
    hi = np.array([y_bounds[1], z_bounds[1]], dtype=float)
    scale = surrogate.scale

    x = np.clip(np.asarray(start, dtype=float), lo, hi)
    current = surrogate.evaluate(*x)
    if current is None:
        raise SolverError("subproblem start point is infeasible", diagnostics={"start": x.tolist()})

    grad = current.grad / scale
    diagonal = float(np.linalg.norm(hi - lo))
    step = diagonal / max(float(np.linalg.norm(grad)), 1e-12) if diagonal > 0 else 1.0

    for iteration in range(max_iterations):
        certificate = np.clip(x + grad, lo, hi) - x
        if np.linalg.norm(certificate) <= tolerance:
            return x, current, iteration

        t = step
        while True:
            candidate = np.clip(x + t * grad, lo, hi)
            moved = candidate - x
            if not np.any(moved):
                # no representable move along the projected arc
                _warn_uncertified(x, grad, lo, hi, tolerance, iteration)
                return x, current, iteration
            trial = surrogate.evaluate(*candidate)
            if trial is not None and (trial.value - current.value) / scale >= ARMIJO_SLOPE * float(grad @ moved):
                break
            t *= 0.5
            if t * float(np.linalg.norm(grad)) <= 1e-15 * (1.0 + float(np.linalg.norm(x))):
                _warn_uncertified(x, grad, lo, hi, tolerance, iteration)
                return x, current, iteration

        trial_grad = trial.grad / scale
        s = candidate - x
        curvature = -float(s @ (trial_grad - grad))
        step = float(s @ s) / curvature if curvature > 0 else 2.0 * t
        step = min(max(step, 1e-12), 1e12)
        x, current, grad = candidate, trial, trial_grad

    raise SolverError(
        f"inner solver did not reach stationarity in {max_iterations} iterations",
        diagnostics={
            "point": x.tolist(),
            "value": current.value,
            "projected_gradient": float(np.linalg.norm(np.clip(x + grad, lo, hi) - x)),
        },
    )


def _warn_uncertified(x, grad, lo, hi, tolerance, iteration) -> None:
    certificate = float(np.linalg.norm(np.clip(x + grad, lo, hi) - x))
    if certificate > tolerance:
        logger.warning(
            f"line search stalled at {x.tolist()} after {iteration} iterations; "
            f"projected gradient {certificate:.3g} exceeds {tolerance:.3g}"
        )


# Objectives of the reduced problem

def true_objective(scenario: Scenario, k: int, placement: PortPlacement) -> float:
    """
    Rate of user k when every other user is pinned at its floor:
    (B - sum_{n != k} R_n / c_n) * c_k. Negative means b_k < 0 (infeasible).
    """
    efficiency = _efficiencies(scenario, placement)
    return _best_user_rate(scenario, k, efficiency)


def equal_share_objective(scenario: Scenario, placement: PortPlacement) -> float:
    """Sum rate under the equal split b_n = B / N."""
    efficiency = _efficiencies(scenario, placement)
    return float(scenario.total_bandwidth / scenario.n_users * np.sum(efficiency))


def _efficiencies(scenario: Scenario, placement: PortPlacement) -> np.ndarray:
    lengths = effective_lengths(scenario, *placement.as_tuple())
    return spectral_efficiencies(scenario, gain_from_length(scenario, lengths))


def _best_user_rate(scenario: Scenario, k: int, efficiency: np.ndarray) -> float:
    others = np.arange(efficiency.size) != k
    if np.any(efficiency[others] <= 0):
        return -math.inf
    leftover = scenario.total_bandwidth - float(np.sum(scenario.min_rates()[others] / efficiency[others]))
    return leftover * float(efficiency[k])


def surrogate_objective(state: ScaState, q: Sequence[float], bandwidth: float, rates: Sequence[float], k: int) -> float:
    """
    Concave minorant of B q_k^2 - sum_{n != k} (R_n / q_n) q_k^2, tight at state.q:
    B (q_k^t)^2 + 2 B q_k^t (q_k - q_k^t) - sum_{n != k} (R_n / q_n) q_k^2.

    Raises:
        ValueError: If some q_n (n != k) is not positive
    """
    q = np.asarray(q, dtype=float)
    rates = np.asarray(rates, dtype=float)
    others = np.arange(q.size) != k
    if np.any(q[others] <= 0):
        raise ValueError("domain violation")
    qt = float(state.q[k])
    pinned = float(np.sum(rates[others] / q[others]))
    return bandwidth * qt * qt + 2.0 * bandwidth * qt * (q[k] - qt) - pinned * q[k] * q[k]


def linearized_snr_constraint(
    state: ScaState, scenario: Scenario, n: int, y1: float, z1: float, u_n: float
) -> float:
    """
    Residual of the linearized SNR constraint for user n (feasible iff <= 0):
    kappa_n L_n(y1, z1)^alpha - (1/u_t - (u_n - u_t)/u_t^2).

    Raises:
        ValueError: If the expansion value u_t is not positive
    """
    u_t = float(state.u[n])
    if u_t <= 0:
        raise ValueError("invalid expansion point")
    length = effective_lengths(scenario, y1, z1, state.y2, state.z2)[n]
    kappa = scenario.noise_power / (scenario.users[n].tx_power * scenario.ref_gain)
    lhs = kappa * float(length) ** scenario.path_loss_exp
    return lhs - (1.0 / u_t - (u_n - u_t) / (u_t * u_t))


def hessian_psd_check(q_k: float, q_n: float) -> bool:
    """
    Whether the Hessian of q_k^2 / q_n, (2 / q_n^3) [q_n, -q_k]^T [q_n, -q_k],
    is positive semi-definite (eigenvalues >= -1e-12, relative to its norm).

    Raises:
        ValueError: If q_n is not positive
    """
    if q_n <= 0:
        raise ValueError("q_n must be positive")
    v = np.array([q_n, -q_k], dtype=float)
    hessian = (2.0 / q_n ** 3) * np.outer(v, v)
    eigenvalues = np.linalg.eigvalsh(hessian)
    return bool(eigenvalues.min() >= -1e-12 * max(1.0, float(np.abs(eigenvalues).max())))


# Expansion and the outer loop

def expand_state(
    scenario: Scenario,
    k: Optional[int],
    y1: float,
    z1: float,
    y2: float,
    z2: float,
    iterate_index: int = 0,
    inner_iterations: int = 0,
) -> ScaState:
    """
    Tight slacks at a point: u_n = SNR_n, q_n = log2(1 + u_n) and, for the
    best-user objective, q_k = sqrt(log2(1 + u_k)). The surrogate equals the
    true objective here.
    """
    placement = PortPlacement(y1=y1, z1=z1, y2=y2, z2=z2)
    lengths = effective_lengths(scenario, y1, z1, y2, z2)
    gains = gain_from_length(scenario, lengths)
    u = scenario.tx_powers() * gains / scenario.noise_power
    q = np.log2(1.0 + u)
    if k is None:
        objective = equal_share_objective(scenario, placement)
        surrogate = objective
    else:
        q[k] = math.sqrt(q[k])
        objective = _best_user_rate(scenario, k, np.log2(1.0 + u))
        surrogate = (
            surrogate_objective_value(q, k, scenario.total_bandwidth, scenario.min_rates())
            if np.all(q > 0)
            else -math.inf
        )
    return ScaState(
        iterate_index=iterate_index,
        y1=float(y1),
        z1=float(z1),
        q=q,
        u=u,
        surrogate_value=float(surrogate),
        true_objective=float(objective),
        k=k,
        y2=float(y2),
        z2=float(z2),
        inner_iterations=inner_iterations,
    )


def surrogate_objective_value(q: np.ndarray, k: int, bandwidth: float, rates: np.ndarray) -> float:
    """Surrogate at its own expansion point: (B - sum R_n / q_n) q_k^2."""
    others = np.arange(q.size) != k
    return (bandwidth - float(np.sum(rates[others] / q[others]))) * float(q[k]) ** 2


def solve_subproblem(
    state: ScaState, scenario: Scenario, k: Optional[int], config: Optional[SolverConfig] = None
) -> ScaState:
    """
    Maximize the convex subproblem expanded at `state`.

    Args:
        state: Expansion point (feasible for its own subproblem)
        scenario: Problem instance
        k: Best-user hypothesis, or None for the equal-share objective
        config: Solver tolerances

    Returns:
        New state holding the subproblem optimum and the true objective there

    Raises:
        SolverError: Infeasible expansion point or inner iteration cap exceeded
    """
    config = config or SolverConfig()
    geometry = PortAGeometry(scenario, state.y2, state.z2)
    if k is None:
        surrogate = EqualShareSurrogate(geometry, state, scenario.total_bandwidth, scenario.n_users)
    else:
        if state.k != k:
            raise ValueError(f"state was expanded for user {state.k}, not {k}")
        surrogate = BestUserSurrogate(geometry, state, scenario.total_bandwidth, scenario.min_rates())

    point, evaluation, inner = maximize_on_box(
        surrogate,
        (state.y1, state.z1),
        scenario.y_bounds,
        scenario.z_bounds,
        config.inner_tolerance,
        config.max_inner_iterations,
    )
    y1, z1 = float(point[0]), float(point[1])
    placement = PortPlacement(y1=y1, z1=z1, y2=state.y2, z2=state.z2)
    objective = (
        equal_share_objective(scenario, placement) if k is None else true_objective(scenario, k, placement)
    )
    return ScaState(
        iterate_index=state.iterate_index + 1,
        y1=y1,
        z1=z1,
        q=evaluation.q,
        u=evaluation.u,
        surrogate_value=evaluation.value,
        true_objective=objective,
        k=k,
        y2=state.y2,
        z2=state.z2,
        inner_iterations=inner,
    )


class ScaEngine:
    """
    Runs the outer SCA loop for port A with port B fixed at (y2, z2).
    """

    def __init__(self, scenario: Scenario, y2: float, z2: float, config: Optional[SolverConfig] = None):
        self.scenario = scenario
        self.y2 = float(y2)
        self.z2 = float(z2)
        self.config = config or SolverConfig()

    def optimize(self, k: Optional[int], init: Tuple[float, float]) -> Tuple[PortPlacement, ScaTrace]:
        """
        Iterate subproblems from `init` until the true objective settles.

        Args:
            k: Best-user hypothesis (0-based), or None for the equal-share objective
            init: Initial (y1, z1) inside the feasible rectangle

        Returns:
            (final placement, trace)
        """
        y1, z1 = init
        if not (self.scenario.y_bounds[0] <= y1 <= self.scenario.y_bounds[1]
                and self.scenario.z_bounds[0] <= z1 <= self.scenario.z_bounds[1]):
            raise ValueError(f"initial point ({y1}, {z1}) is outside the feasible rectangle")

        state = expand_state(self.scenario, k, y1, z1, self.y2, self.z2)
        trace = ScaTrace(states=[state])
        if not self._start_is_feasible(state):
            trace.termination = Termination.INFEASIBLE_START
            logger.debug(f"k={k} start ({y1:.3f}, {z1:.3f}) infeasible")
            return self._placement(state), trace

        cfg = self.config
        trace.termination = Termination.MAX_ITERATIONS
        for _ in range(cfg.max_outer_iterations):
            solved = solve_subproblem(state, self.scenario, k, cfg)
            previous = state.true_objective
            trace.states.append(solved)
            logger.debug(
                f"k={k} t={solved.iterate_index} y1={solved.y1:.6f} z1={solved.z1:.6f} "
                f"objective={solved.true_objective:.6f} inner={solved.inner_iterations}"
            )
            # re-expand tight slacks at the new point
            state = expand_state(
                self.scenario, k, solved.y1, solved.z1, self.y2, self.z2,
                iterate_index=solved.iterate_index, inner_iterations=solved.inner_iterations,
            )
            if abs(solved.true_objective - previous) <= cfg.outer_tolerance * (1.0 + abs(solved.true_objective)):
                trace.termination = Termination.CONVERGED
                break

        return self._placement(trace.final), trace

    def _start_is_feasible(self, state: ScaState) -> bool:
        if not np.all(state.u > 0) or not np.isfinite(state.true_objective):
            return False
        if state.k is None:
            return True
        return state.true_objective >= 0.0

    def _placement(self, state: ScaState) -> PortPlacement:
        return PortPlacement(y1=state.y1, z1=state.z1, y2=self.y2, z2=self.z2)


def sca_optimize_port_a(
    scenario: Scenario,
    k: int,
    y2: float,
    z2: float,
    init: Tuple[float, float],
    config: Optional[SolverConfig] = None,
) -> Tuple[PortPlacement, ScaTrace]:
    """Best-user SCA for port A (convenience wrapper around ScaEngine)."""
    return ScaEngine(scenario, y2, z2, config).optimize(k, init)


def start_points(scenario: Scenario, config: Optional[SolverConfig] = None) -> List[Tuple[float, float]]:
    """
    Initial port-A points: a g x g grid over the rectangle followed by the
    projection of every user's (u_n2, 0) onto it.
    """
    config = config or SolverConfig()
    ylo, yhi = scenario.y_bounds
    zlo, zhi = scenario.z_bounds
    g = config.multistart_grid
    if g == 1:
        ys, zs = [0.5 * (ylo + yhi)], [0.5 * (zlo + zhi)]
    else:
        ys, zs = np.linspace(ylo, yhi, g).tolist(), np.linspace(zlo, zhi, g).tolist()
    points = [(float(y), float(z)) for y in ys for z in zs]
    if config.include_user_projections:
        for user in scenario.users:
            points.append((min(max(user.position[1], ylo), yhi), min(max(0.0, zlo), zhi)))
    return points
