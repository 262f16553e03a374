"""Evaluation quantities: channel MSE, steady-state excess-MSE bounds,
effective post-estimation SNR, and closed-form PSK/QAM BER approximations.

All functions are pure and operate on plain floats and numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    ConfigError,
    DimensionMismatchError,
    OutOfRegimeError,
    SingularMatrixError,
)

__all__ = [
    "TheoryInputs",
    "BerConstants",
    "ModulationScheme",
    "average_mse",
    "steady_state_mse_nlms",
    "steady_state_mse_limit",
    "effective_snr",
    "psk_ber",
    "qam_ber",
]


@dataclass(frozen=True)
class TheoryInputs:
    """Inputs to the steady-state excess-MSE expressions.

    ``lambda_max`` is the largest eigenvalue of the input covariance;
    when the full ``covariance`` matrix is supplied it must be symmetric
    positive semidefinite and consistent with ``lambda_max`` to 1e-9.
    """

    lambda_max: float
    noise_power: float
    step: float
    covariance: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.lambda_max <= 0.0:
            raise ConfigError(f"lambda_max must be > 0, got {self.lambda_max}")
        if self.noise_power < 0.0:
            raise ConfigError(f"noise_power must be >= 0, got {self.noise_power}")
        if self.covariance is not None:
            r = np.asarray(self.covariance, dtype=float)
            object.__setattr__(self, "covariance", r)
            if r.ndim != 2 or r.shape[0] != r.shape[1]:
                raise DimensionMismatchError(
                    f"covariance must be square, got shape {r.shape}"
                )
            if not np.allclose(r, r.T, atol=1e-10):
                raise ConfigError("covariance must be symmetric")
            eigvals = np.linalg.eigvalsh(r)
            if eigvals[0] < -1e-10:
                raise ConfigError("covariance must be positive semidefinite")
            if abs(eigvals[-1] - self.lambda_max) > 1e-9:
                raise ConfigError(
                    f"lambda_max {self.lambda_max} does not match the covariance "
                    f"spectrum (largest eigenvalue {eigvals[-1]})"
                )


@dataclass(frozen=True)
class BerConstants:
    """Curve-fitting coefficients of the exponential BER approximations."""

    a1: float = 0.3017
    a2: float = 0.438
    b: float = 1.0510


@dataclass(frozen=True)
class ModulationScheme:
    """A PSK or QAM constellation of ``levels`` symbols."""

    kind: str
    levels: int

    def __post_init__(self) -> None:
        if self.kind not in ("psk", "qam"):
            raise ConfigError(f"kind must be 'psk' or 'qam', got {self.kind!r}")
        if self.kind == "psk" and self.levels < 4:
            raise ConfigError(f"PSK needs levels >= 4, got {self.levels}")
        if self.kind == "qam":
            root = math.isqrt(self.levels)
            if self.levels < 4 or root * root != self.levels:
                raise ConfigError(
                    f"QAM needs a perfect-square level count >= 4, got {self.levels}"
                )

    @classmethod
    def parse(cls, label: str) -> "ModulationScheme":
        """Parse labels like '8PSK' or '16QAM' (case-insensitive)."""
        text = label.strip().upper()
        for kind in ("PSK", "QAM"):
            if text.endswith(kind):
                try:
                    levels = int(text[: -len(kind)])
                except ValueError:
                    break
                return cls(kind=kind.lower(), levels=levels)
        raise ConfigError(f"cannot parse modulation label {label!r}")

    @property
    def label(self) -> str:
        return f"{self.levels}{self.kind.upper()}"

    @property
    def k_factor(self) -> float:
        """(sqrt(M) - 1) / sqrt(M); defined for QAM only."""
        if self.kind != "qam":
            raise ConfigError("k_factor is defined for QAM schemes only")
        root = math.sqrt(self.levels)
        return (root - 1.0) / root

    def ber(
        self, gamma_s: float, consts: BerConstants = BerConstants(), clamp: bool = True
    ) -> float:
        if self.kind == "psk":
            return psk_ber(gamma_s, self.levels, consts, clamp=clamp)
        return qam_ber(gamma_s, self.levels, consts, clamp=clamp)


def average_mse(truth: np.ndarray, estimate: np.ndarray) -> float:
    """Squared l2 distance between the true and estimated tap vectors.

    This is the single-run quantity; the Monte-Carlo harness averages it
    across independent runs.
    """
    t = np.asarray(truth, dtype=float)
    e = np.asarray(estimate, dtype=float)
    if t.shape != e.shape:
        raise DimensionMismatchError(
            f"truth length {t.size} != estimate length {e.size}"
        )
    diff = t - e
    return float(diff @ diff)


def steady_state_mse_nlms(inputs: TheoryInputs) -> tuple[Optional[float], float]:
    """Steady-state excess MSE of the plain fixed-step NLMS estimator.

    Returns ``(trace_form, lower_bound)``. The trace form
    ``T*sigma^2 / (2 - T)`` with ``T = tr[R (I - mu R)^-1]`` is computed
    only when the covariance matrix is supplied (None otherwise); the
    closed-form lower bound ``lambda_max*sigma^2 / (2 - 3*mu*lambda_max)``
    is always computed.

    Raises :class:`OutOfRegimeError` when a denominator is nonpositive and
    :class:`SingularMatrixError` when (I - mu R) cannot be inverted.
    """
    trace_form: Optional[float] = None
    if inputs.covariance is not None:
        r = inputs.covariance
        eye = np.eye(r.shape[0])
        try:
            resolvent = np.linalg.solve(eye - inputs.step * r, r)
        except np.linalg.LinAlgError as exc:
            raise SingularMatrixError(
                "(I - mu R) is singular; pick a smaller step"
            ) from exc
        t = float(np.trace(resolvent))
        trace_denom = 2.0 - t
        if trace_denom <= 0.0:
            raise OutOfRegimeError(
                f"trace denominator 2 - tr[R(I - mu R)^-1] = {trace_denom} "
                f"is not positive"
            )
        trace_form = t * inputs.noise_power / trace_denom

    bound_denom = 2.0 - 3.0 * inputs.step * inputs.lambda_max
    if bound_denom <= 0.0:
        raise OutOfRegimeError(
            f"bound denominator 2 - 3*mu*lambda_max = {bound_denom} is not positive"
        )
    lower_bound = inputs.lambda_max * inputs.noise_power / bound_denom

    return trace_form, lower_bound


def steady_state_mse_limit(lambda_max: float, noise_power: float) -> float:
    """Small-step limit of the steady-state excess MSE: lambda_max*sigma^2/2."""
    if lambda_max < 0.0:
        raise ConfigError(f"lambda_max must be >= 0, got {lambda_max}")
    if noise_power < 0.0:
        raise ConfigError(f"noise_power must be >= 0, got {noise_power}")
    return lambda_max * noise_power / 2.0


def effective_snr(snr_db: float, mse: float) -> float:
    """Post-estimation symbol SNR, degraded by channel-estimate error.

    With rho the linear received SNR, returns rho*(1 - mse)/(rho*mse + 1):
    a perfect estimate (mse = 0) passes the received SNR through, a useless
    one (mse = 1) yields zero. The residual estimation error acts as extra
    noise proportional to the signal power.
    """
    if not math.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db}")
    if not 0.0 <= mse <= 1.0:
        raise ValueError(f"mse must lie in [0, 1], got {mse}")
    rho = 10.0 ** (snr_db / 10.0)
    return rho * (1.0 - mse) / (rho * mse + 1.0)


def psk_ber(
    gamma_s: float,
    levels: int,
    consts: BerConstants = BerConstants(),
    clamp: bool = True,
) -> float:
    """Two-exponential BER approximation for M-ary PSK, M >= 4.

    The curve fit can stray outside [0, 1] at extreme SNR; the default
    clamps the result, pass ``clamp=False`` for the raw value.
    """
    if levels < 4:
        raise ValueError(f"PSK approximation needs levels >= 4, got {levels}")
    if gamma_s < 0.0:
        raise ValueError(f"gamma_s must be >= 0, got {gamma_s}")
    s = math.sin(math.pi / levels) ** 2
    raw = consts.a1 * math.exp(-consts.b * gamma_s * s) + consts.a2 * math.exp(
        -2.0 * consts.b * gamma_s * s
    )
    return min(max(raw, 0.0), 1.0) if clamp else raw


def qam_ber(
    gamma_s: float,
    levels: int,
    consts: BerConstants = BerConstants(),
    clamp: bool = True,
) -> float:
    """Four-term exponential BER approximation for square M-ary QAM.

    Uses k = (sqrt(M) - 1)/sqrt(M). Clamped to [0, 1] by default, same as
    :func:`psk_ber`.
    """
    root = math.isqrt(levels)
    if levels < 4 or root * root != levels:
        raise ValueError(
            f"QAM approximation needs a perfect-square level count >= 4, "
            f"got {levels}"
        )
    if gamma_s < 0.0:
        raise ValueError(f"gamma_s must be >= 0, got {gamma_s}")
    k = (root - 1.0) / root
    a1, a2, b = consts.a1, consts.a2, consts.b
    x = b * gamma_s / (levels - 1)
    raw = (
        2.0 * k * a1 * math.exp(-1.5 * x)
        + (2.0 * k * a2 - k * k * a1 * a1) * math.exp(-3.0 * x)
        - k * k * a2 * a2 * math.exp(-6.0 * x)
        - 2.0 * k * k * a1 * a2 * math.exp(-4.5 * x)
    )
    return min(max(raw, 0.0), 1.0) if clamp else raw
