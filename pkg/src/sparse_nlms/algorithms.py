"""Sparse NLMS adaptive estimators with fixed and error-driven step sizes.

Six update rules share one skeleton,

    w(n+1) = w(n) + step * e(n) * x / (x'x) - penalty(w(n)),

where ``step`` is either a fixed mu (the ISS family) or recomputed every
iteration from a smoothed error projection (the VSS family), and
``penalty`` is nothing (plain), a zero-attracting l1 pull (ZA), or its
reweighted variant that spares large coefficients (RZA).

The VSS policy keeps an exponentially smoothed projection of the
normalized error direction,

    p(n+1) = beta * p(n) + (1 - beta) * e(n) * x / (x'x),

and maps its energy through a saturating curve,

    step(n+1) = mu_max * |p|^2 / (|p|^2 + C),

so the realized step grows toward mu_max while the estimation error is
large and decays toward zero as the filter settles.

All operations are pure: state goes in, new state comes out. Running many
independent trials in parallel is safe as long as a single FilterState is
not shared between contexts.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import ConfigError, DimensionMismatchError, StreamExhaustedError

__all__ = [
    "VARIANTS",
    "ISS_NLMS",
    "ISS_ZA_NLMS",
    "ISS_RZA_NLMS",
    "VSS_NLMS",
    "VSS_ZA_NLMS",
    "VSS_RZA_NLMS",
    "ENERGY_FLOOR",
    "AlgorithmSpec",
    "FilterState",
    "StopCriterion",
    "TrialTrace",
    "compute_error",
    "sign_vector",
    "za_penalty",
    "rza_penalty",
    "vss_update_projection",
    "vss_step_size",
    "step",
    "run_until_stop",
    "initial_state",
]

ISS_NLMS = "ISS-NLMS"
ISS_ZA_NLMS = "ISS-ZA-NLMS"
ISS_RZA_NLMS = "ISS-RZA-NLMS"
VSS_NLMS = "VSS-NLMS"
VSS_ZA_NLMS = "VSS-ZA-NLMS"
VSS_RZA_NLMS = "VSS-RZA-NLMS"

VARIANTS = (
    ISS_NLMS,
    ISS_ZA_NLMS,
    ISS_RZA_NLMS,
    VSS_NLMS,
    VSS_ZA_NLMS,
    VSS_RZA_NLMS,
)

_VSS_VARIANTS = frozenset({VSS_NLMS, VSS_ZA_NLMS, VSS_RZA_NLMS})
_ZA_VARIANTS = frozenset({ISS_ZA_NLMS, VSS_ZA_NLMS})
_RZA_VARIANTS = frozenset({ISS_RZA_NLMS, VSS_RZA_NLMS})

# Below this input energy the normalized gradient, projection, and penalty
# updates are skipped for the iteration to avoid division blow-up.
ENERGY_FLOOR = 1e-12


@dataclass(frozen=True)
class AlgorithmSpec:
    """Which update rule to run, plus every tuning knob it needs.

    Parameters
    ----------
    variant : str
        One of ``VARIANTS`` (case-sensitive canonical names).
    mu : float
        Fixed step size for the ISS family; unused by VSS variants.
    mu_max : float
        Ceiling of the variable step size; the realized step stays
        strictly below it.
    rho_za : float
        Strength of the zero-attracting pull (ZA variants).
    rho_rza : float
        Strength of the reweighted zero-attracting pull (RZA variants).
    eps_rza : float
        Reweighting factor; the RZA pull stays strong for taps below
        magnitude ``1/eps_rza`` and fades out beyond it.
    beta : float
        Smoothing factor of the error projection, in [0, 1].
    threshold_c : float
        Positive knee of the step-size curve; on the order of 1/SNR.
    unnormalized_rza : bool
        Compatibility switch: when True, ISS-RZA applies the raw gradient
        ``mu * e * x`` without dividing by the input energy. Default off;
        the normalized form is the consistent reading of the rule family.
    """

    variant: str
    mu: float = 0.2
    mu_max: float = 2.0
    rho_za: float = 0.0
    rho_rza: float = 0.0
    eps_rza: float = 20.0
    beta: float = 0.99
    threshold_c: float = 1e-5
    unnormalized_rza: bool = False

    def __post_init__(self) -> None:
        self.validate()

    def validate(self, level: str = "paper") -> None:
        """Check every parameter range.

        ``level="paper"`` admits the boundary values mu = 1 and mu_max = 2;
        ``level="strict"`` enforces the open intervals (0, 1) and (0, 2).
        """
        if level not in ("paper", "strict"):
            raise ConfigError(f"unknown validation level {level!r}")
        if self.variant not in VARIANTS:
            raise ConfigError(
                f"unknown variant {self.variant!r}; expected one of {', '.join(VARIANTS)}"
            )
        strict = level == "strict"
        if not (0.0 < self.mu < 1.0 or (not strict and self.mu == 1.0)):
            raise ConfigError(f"mu must lie in (0, 1{')' if strict else ']'}, got {self.mu}")
        if not (0.0 < self.mu_max < 2.0 or (not strict and self.mu_max == 2.0)):
            raise ConfigError(
                f"mu_max must lie in (0, 2{')' if strict else ']'}, got {self.mu_max}"
            )
        if self.rho_za < 0.0:
            raise ConfigError(f"rho_za must be >= 0, got {self.rho_za}")
        if self.rho_rza < 0.0:
            raise ConfigError(f"rho_rza must be >= 0, got {self.rho_rza}")
        if self.eps_rza <= 0.0:
            raise ConfigError(f"eps_rza must be > 0, got {self.eps_rza}")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must lie in [0, 1], got {self.beta}")
        if self.threshold_c <= 0.0:
            raise ConfigError(f"threshold_c must be > 0, got {self.threshold_c}")

    @property
    def is_vss(self) -> bool:
        return self.variant in _VSS_VARIANTS

    @property
    def penalty_kind(self) -> str:
        """'none', 'za', or 'rza'."""
        if self.variant in _ZA_VARIANTS:
            return "za"
        if self.variant in _RZA_VARIANTS:
            return "rza"
        return "none"


@dataclass(frozen=True)
class FilterState:
    """Running state of one adaptive estimator.

    ``weights`` is the current channel estimate, ``projection`` the
    smoothed error projection driving the variable step size (all zeros
    and unused for ISS variants), ``current_step`` the step realized by
    the most recent update, and ``iteration`` the number of completed
    updates.
    """

    weights: np.ndarray
    projection: np.ndarray
    current_step: float = 0.0
    iteration: int = 0

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        p = np.asarray(self.projection, dtype=float)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "projection", p)
        if w.ndim != 1 or p.ndim != 1 or w.shape != p.shape or w.size < 1:
            raise DimensionMismatchError(
                f"weights and projection must be equal-length 1-d vectors, "
                f"got shapes {w.shape} and {p.shape}"
            )
        if self.current_step < 0.0:
            raise ConfigError(f"current_step must be >= 0, got {self.current_step}")
        if self.iteration < 0:
            raise ConfigError(f"iteration must be >= 0, got {self.iteration}")

    @property
    def n_taps(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class StopCriterion:
    """Terminate when the squared update norm drops below ``delta_tolerance``
    or after ``max_iterations`` updates, whichever comes first."""

    delta_tolerance: float = 1e-5
    max_iterations: int = 5000

    def __post_init__(self) -> None:
        if self.delta_tolerance <= 0.0:
            raise ConfigError(
                f"delta_tolerance must be > 0, got {self.delta_tolerance}"
            )
        if self.max_iterations < 0:
            raise ConfigError(
                f"max_iterations must be >= 0, got {self.max_iterations}"
            )


@dataclass
class TrialTrace:
    """Per-iteration record of one run.

    ``errors`` holds the a-priori error e(n), ``step_sizes`` the realized
    step of each update, ``weight_deltas`` the squared update norms fed to
    the stop criterion, and ``metrics`` the values of the caller-supplied
    hook (typically the squared channel-estimation error), or None when no
    hook was given. ``converged`` is True when the run terminated via the
    tolerance rather than the iteration cap.
    """

    errors: np.ndarray
    step_sizes: np.ndarray
    weight_deltas: np.ndarray
    metrics: Optional[np.ndarray] = None
    converged: bool = False

    def __len__(self) -> int:
        return self.errors.size

    @property
    def squared_errors(self) -> np.ndarray:
        return self.errors**2


def initial_state(spec: AlgorithmSpec, n_taps: int) -> FilterState:
    """All-zero starting state: zero estimate, zero projection, zero step.

    ISS variants start with ``current_step`` already at their fixed mu; for
    VSS variants the first realized step comes out of the first projection
    update.
    """
    if n_taps < 1:
        raise ConfigError(f"n_taps must be >= 1, got {n_taps}")
    step0 = 0.0 if spec.is_vss else spec.mu
    return FilterState(
        weights=np.zeros(n_taps),
        projection=np.zeros(n_taps),
        current_step=step0,
        iteration=0,
    )


def compute_error(
    state: FilterState, regressor: np.ndarray, observation: float
) -> float:
    """A-priori error: observation minus the estimate's predicted output."""
    x = np.asarray(regressor, dtype=float)
    if x.shape != state.weights.shape:
        raise DimensionMismatchError(
            f"regressor length {x.size} != filter length {state.weights.size}"
        )
    return float(observation) - float(state.weights @ x)


def sign_vector(v: np.ndarray) -> np.ndarray:
    """Componentwise sign: +1 for positive, 0 for zero, -1 for negative."""
    return np.sign(np.asarray(v, dtype=float))


def za_penalty(weights: np.ndarray, rho_za: float) -> np.ndarray:
    """Zero-attracting pull ``rho_za * sign(w)``; the caller subtracts it.

    Every nonzero coefficient is pulled toward zero by exactly ``rho_za``
    per iteration, regardless of its magnitude.
    """
    if rho_za < 0.0:
        raise ConfigError(f"rho_za must be >= 0, got {rho_za}")
    return rho_za * sign_vector(weights)


def rza_penalty(weights: np.ndarray, rho_rza: float, eps_rza: float) -> np.ndarray:
    """Reweighted pull ``rho_rza * sign(w) / (1 + eps_rza * |w|)``.

    The attraction decreases with tap magnitude: near full strength for
    coefficients below ``1/eps_rza``, vanishing for dominant taps, so the
    penalty drives small taps to zero while sparing large ones.
    """
    if rho_rza < 0.0:
        raise ConfigError(f"rho_rza must be >= 0, got {rho_rza}")
    if eps_rza <= 0.0:
        raise ConfigError(f"eps_rza must be > 0, got {eps_rza}")
    w = np.asarray(weights, dtype=float)
    return rho_rza * np.sign(w) / (1.0 + eps_rza * np.abs(w))


def vss_update_projection(
    projection: np.ndarray, regressor: np.ndarray, error: float, beta: float
) -> np.ndarray:
    """Convex blend of the old projection with the normalized error direction.

    The regressor must carry nonzero energy; callers skip the update for
    degenerate inputs (see ``ENERGY_FLOOR``).
    """
    p = np.asarray(projection, dtype=float)
    x = np.asarray(regressor, dtype=float)
    if p.shape != x.shape:
        raise DimensionMismatchError(
            f"projection length {p.size} != regressor length {x.size}"
        )
    if not 0.0 <= beta <= 1.0:
        raise ConfigError(f"beta must lie in [0, 1], got {beta}")
    energy = float(x @ x)
    if energy <= 0.0:
        raise ValueError("regressor energy must be positive")
    return beta * p + ((1.0 - beta) * error / energy) * x


def vss_step_size(projection: np.ndarray, mu_max: float, threshold_c: float) -> float:
    """Map projection energy to a step in [0, mu_max).

    Returns 0 only for an all-zero projection; approaches mu_max as the
    projection energy dominates the threshold, and equals mu_max/2 when
    the two are equal. Strictly increasing in the projection energy.
    """
    if threshold_c <= 0.0:
        raise ConfigError(f"threshold_c must be > 0, got {threshold_c}")
    if mu_max <= 0.0:
        raise ConfigError(f"mu_max must be > 0, got {mu_max}")
    p = np.asarray(projection, dtype=float)
    pp = float(p @ p)
    return mu_max * pp / (pp + threshold_c)


def _penalty(spec: AlgorithmSpec, weights: np.ndarray) -> Optional[np.ndarray]:
    kind = spec.penalty_kind
    if kind == "za":
        return za_penalty(weights, spec.rho_za)
    if kind == "rza":
        return rza_penalty(weights, spec.rho_rza, spec.eps_rza)
    return None


def step(
    state: FilterState,
    spec: AlgorithmSpec,
    regressor: np.ndarray,
    observation: float,
) -> tuple[FilterState, float]:
    """One full adaptive iteration; returns the new state and a-priori error.

    Order of operations: compute the error against the current estimate;
    for VSS variants refresh the projection and derive the step from it,
    for ISS variants use the fixed mu; apply the normalized gradient step;
    subtract the variant's sparsity penalty; bump the iteration counter.

    If the regressor energy is below ``ENERGY_FLOOR`` the whole update is
    skipped (weights, projection, and step unchanged) and only the
    iteration counter advances; the error is still computed and returned.
    """
    x = np.asarray(regressor, dtype=float)
    if x.shape != state.weights.shape:
        raise DimensionMismatchError(
            f"regressor length {x.size} != filter length {state.weights.size}"
        )
    error = float(observation) - float(state.weights @ x)
    energy = float(x @ x)
    if energy < ENERGY_FLOOR:
        skipped = replace(state, iteration=state.iteration + 1)
        return skipped, error

    if spec.is_vss:
        projection = spec.beta * state.projection + (
            (1.0 - spec.beta) * error / energy
        ) * x
        mu_n = vss_step_size(projection, spec.mu_max, spec.threshold_c)
    else:
        projection = state.projection
        mu_n = spec.mu

    if spec.variant == ISS_RZA_NLMS and spec.unnormalized_rza:
        gradient = (mu_n * error) * x
    else:
        gradient = (mu_n * error / energy) * x

    weights = state.weights + gradient
    penalty = _penalty(spec, state.weights)
    if penalty is not None:
        weights = weights - penalty

    new_state = FilterState(
        weights=weights,
        projection=projection,
        current_step=mu_n,
        iteration=state.iteration + 1,
    )
    return new_state, error


def run_until_stop(
    initial: FilterState,
    spec: AlgorithmSpec,
    stop: StopCriterion,
    sample_stream: Iterable[tuple[np.ndarray, float]],
    metric_hook: Optional[Callable[[FilterState], float]] = None,
) -> tuple[FilterState, TrialTrace]:
    """Iterate :func:`step` over (regressor, observation) pairs until the
    squared update norm falls to ``stop.delta_tolerance`` or the iteration
    cap is hit.

    The tolerance check runs on the realized iterate difference of every
    update, penalty contribution included. ``metric_hook``, when given, is
    evaluated on the state after each update and recorded in the trace.

    Raises :class:`StreamExhaustedError` if the stream runs out first.
    """
    state = initial
    samples = iter(sample_stream)
    errors: list[float] = []
    steps: list[float] = []
    deltas: list[float] = []
    metrics: list[float] = []
    converged = False

    while state.iteration < stop.max_iterations:
        try:
            regressor, observation = next(samples)
        except StopIteration:
            raise StreamExhaustedError(
                f"sample stream exhausted after {len(errors)} iterations, "
                f"before the stop criterion was met"
            ) from None
        previous = state.weights
        state, error = step(state, spec, regressor, observation)
        diff = state.weights - previous
        delta = float(diff @ diff)
        errors.append(error)
        steps.append(state.current_step)
        deltas.append(delta)
        if metric_hook is not None:
            metrics.append(float(metric_hook(state)))
        if delta <= stop.delta_tolerance:
            converged = True
            break

    trace = TrialTrace(
        errors=np.asarray(errors),
        step_sizes=np.asarray(steps),
        weight_deltas=np.asarray(deltas),
        metrics=np.asarray(metrics) if metric_hook is not None else None,
        converged=converged,
    )
    return state, trace
