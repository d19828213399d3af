"""Least-squares fits of decay, fringe and phase-space cut data.

Design Decision: Automatic seeds, Levenberg–Marquardt refinement

Rationale: Every fit here must run unattended (CI, ``reproduce``), so each
model computes its own starting point before handing over to
``scipy.optimize.curve_fit(method="lm")``:

- decays: log-linear regression on baseline-subtracted data
- oscillations: the peak of a zero-padded FFT fixes the frequency, after
  which amplitude and phase follow from a linear solve
- Gaussians: first and second moments of the baseline-subtracted data

Trade-offs:
- Uncertainties are sqrt(diag(pcov)) with pcov scaled by the residual
  variance, the conventional "±" of a least-squares fit; no claim of
  exactness is made
- A fit that stops at the evaluation limit raises ``FitError``; a fit that
  returns non-finite parameters is reported with ``converged=False``
"""

from __future__ import annotations

import logging
import math
import warnings
from collections.abc import Callable, Sequence

import numpy as np
from scipy.fft import rfft, rfftfreq
from scipy.optimize import OptimizeWarning, curve_fit

from cavity_memory.exceptions import FitError
from cavity_memory.models.results import FitResult


logger = logging.getLogger(__name__)

MAX_EVALUATIONS = 20000
FFT_PADDING = 8
SQRT_2PI = math.sqrt(2.0 * math.pi)


# =============================================================================
# Model functions
# =============================================================================


def exponential_model(x: np.ndarray, amplitude: float, tau: float, offset: float = 0.0) -> np.ndarray:
    return amplitude * np.exp(-x / tau) + offset


def pure_exponential_model(x: np.ndarray, amplitude: float, tau: float) -> np.ndarray:
    return amplitude * np.exp(-x / tau)


def exp_cos_model(
    x: np.ndarray, amplitude: float, tau: float, frequency: float, phase: float, offset: float
) -> np.ndarray:
    return amplitude * np.exp(-x / tau) * np.cos(2.0 * np.pi * frequency * x + phase) + offset


def cosine_model(
    x: np.ndarray, amplitude: float, period: float, phase: float, offset: float
) -> np.ndarray:
    return amplitude * np.cos(2.0 * np.pi * x / period + phase) + offset


def gaussian_model(
    x: np.ndarray, amplitude: float, mean: float, sigma: float, offset: float
) -> np.ndarray:
    return amplitude / (sigma * SQRT_2PI) * np.exp(-((x - mean) ** 2) / (2.0 * sigma**2)) + offset


def modulated_gaussian_model(
    x: np.ndarray, amplitude: float, mean: float, sigma: float, frequency: float, phase: float
) -> np.ndarray:
    """Gaussian envelope times sin(f·x + φ); f is angular (rad per unit x)."""
    envelope = gaussian_model(x, amplitude, mean, sigma, 0.0)
    return envelope * np.sin(frequency * x + phase)


# =============================================================================
# Helpers
# =============================================================================


def _prepare(x: Sequence[float], y: Sequence[float], min_points: int) -> tuple[np.ndarray, np.ndarray]:
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise FitError(f"x and y must be 1-D of equal length, got {xs.shape} and {ys.shape}")
    if xs.size < min_points:
        raise FitError(f"Need at least {min_points} points, got {xs.size}")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise FitError("Data contain non-finite values")
    if np.any(np.diff(xs) <= 0.0):
        raise FitError("x must be strictly increasing")
    if np.ptp(ys) == 0.0:
        raise FitError("Degenerate data: y has zero variance")
    return xs, ys


def _spectral_peak(x: np.ndarray, y: np.ndarray) -> float:
    """Frequency (cycles per unit x) of the largest non-DC spectral component.

    Raises:
        FitError: If the peak sits below one cycle per span
    """
    span = x[-1] - x[0]
    uniform = np.linspace(x[0], x[-1], x.size)
    resampled = np.interp(uniform, x, y - np.mean(y))
    n_fft = FFT_PADDING * x.size
    spectrum = np.abs(rfft(resampled, n=n_fft))
    freqs = rfftfreq(n_fft, d=uniform[1] - uniform[0])
    peak = float(freqs[1 + int(np.argmax(spectrum[1:]))])
    if peak < 1.0 / span:
        raise FitError(
            f"No spectral peak: strongest component {peak:.4g} is below one cycle per span"
        )
    return peak


def _quadrature_amplitude(a: float, b: float) -> tuple[float, float]:
    """(A, φ) with A·cos(θ + φ) = a·cos θ − b·sin θ."""
    return math.hypot(a, b), math.atan2(b, a)


def _wrap_phase(phase: float) -> float:
    return (phase + math.pi) % (2.0 * math.pi) - math.pi


def _least_squares(
    model_name: str,
    func: Callable[..., np.ndarray],
    x: np.ndarray,
    y: np.ndarray,
    seed: dict[str, float],
) -> tuple[dict[str, float], dict[str, float], float, bool]:
    names = list(seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OptimizeWarning)
        try:
            popt, pcov = curve_fit(
                func, x, y, p0=[seed[n] for n in names], method="lm", maxfev=MAX_EVALUATIONS
            )
        except RuntimeError as e:
            raise FitError(f"{model_name} fit did not converge: {e}") from e
    params = dict(zip(names, (float(v) for v in popt), strict=True))
    errors = np.sqrt(np.abs(np.diag(pcov))) if np.all(np.isfinite(pcov)) else np.full(len(names), np.inf)
    uncertainties = dict(zip(names, (float(v) for v in errors), strict=True))
    residual = float(np.linalg.norm(func(x, *popt) - y))
    converged = bool(np.all(np.isfinite(popt)))
    if not converged:
        logger.warning("%s fit returned non-finite parameters", model_name)
    return params, uncertainties, residual, converged


# =============================================================================
# Fitters
# =============================================================================


def fit_exponential(x: Sequence[float], y: Sequence[float], baseline: bool = True) -> FitResult:
    """Fit A·e^{−x/τ} + C (or A·e^{−x/τ} with ``baseline=False``).

    Seeded by a log-linear regression of |y − C₀|, where C₀ sits 5% of the
    data range beyond the extreme the curve decays towards.

    Args:
        x: Strictly increasing abscissa (≥ 4 points)
        y: Data
        baseline: Fit the constant offset C

    Returns:
        FitResult with parameters amplitude, tau (and offset)

    Raises:
        FitError: Too few points, degenerate data or non-convergence
    """
    xs, ys = _prepare(x, y, 4)
    rising = ys[0] < ys[-1]
    spread = float(np.ptp(ys))
    if baseline:
        floor = float(np.max(ys)) + 0.05 * spread if rising else float(np.min(ys)) - 0.05 * spread
        shifted = np.abs(ys - floor)
    else:
        floor = 0.0
        shifted = np.abs(ys)
    shifted = np.clip(shifted, 1e-300, None)
    slope, intercept = np.polyfit(xs, np.log(shifted), 1)
    span = xs[-1] - xs[0]
    tau0 = -1.0 / slope if slope < 0.0 else span
    amp0 = math.exp(intercept) * (-1.0 if (rising if baseline else ys[0] < 0.0) else 1.0)

    seed = {"amplitude": amp0, "tau": tau0}
    if baseline:
        seed["offset"] = floor
    func = exponential_model if baseline else pure_exponential_model

    params, errors, residual, converged = _least_squares("exponential", func, xs, ys, seed)
    logger.info("exponential fit: tau=%.6g ± %.2g", params["tau"], errors["tau"])
    return FitResult("exponential", params, errors, residual, converged)


def fit_exp_cos(
    x: Sequence[float],
    y: Sequence[float],
    fallback_to_exponential: bool = False,
) -> FitResult:
    """Fit A·e^{−x/τ}·cos(2πf·x + φ) + C.

    The frequency is seeded by the spectral peak; τ₀ is half the span and
    (A, φ, C) come from a linear solve at those values.

    Args:
        x: Strictly increasing abscissa (≥ 8 points, ≥ 1 period)
        y: Data
        fallback_to_exponential: Without a spectral peak, fit a plain decay
            and report it with frequency 0 instead of raising

    Raises:
        FitError: No spectral peak, degenerate data or non-convergence
    """
    xs, ys = _prepare(x, y, 8)
    try:
        f0 = _spectral_peak(xs, ys)
    except FitError:
        if not fallback_to_exponential:
            raise
        decay = fit_exponential(xs, ys)
        params = {
            "amplitude": decay.parameters["amplitude"],
            "tau": decay.parameters["tau"],
            "frequency": 0.0,
            "phase": 0.0,
            "offset": decay.parameters["offset"],
        }
        errors = {k: decay.uncertainties[k] for k in ("amplitude", "tau", "offset")}
        errors.update(frequency=0.0, phase=0.0)
        return FitResult("exp_cos", params, errors, decay.residual_norm, decay.converged)

    tau0 = (xs[-1] - xs[0]) / 2.0
    envelope = np.exp(-xs / tau0)
    theta = 2.0 * np.pi * f0 * xs
    design = np.column_stack([envelope * np.cos(theta), -envelope * np.sin(theta), np.ones_like(xs)])
    (a, b, c), *_ = np.linalg.lstsq(design, ys, rcond=None)
    amp0, phase0 = _quadrature_amplitude(float(a), float(b))
    seed = {"amplitude": amp0, "tau": tau0, "frequency": f0, "phase": phase0, "offset": float(c)}

    params, errors, residual, converged = _least_squares("exp_cos", exp_cos_model, xs, ys, seed)
    if params["amplitude"] < 0.0:
        params["amplitude"] = -params["amplitude"]
        params["phase"] += math.pi
    if params["frequency"] < 0.0:
        params["frequency"] = -params["frequency"]
        params["phase"] = -params["phase"]
    params["phase"] = _wrap_phase(params["phase"])
    logger.info(
        "exp_cos fit: tau=%.6g ± %.2g, f=%.6g",
        params["tau"],
        errors["tau"],
        params["frequency"],
    )
    return FitResult("exp_cos", params, errors, residual, converged)


def fit_cosine(x: Sequence[float], y: Sequence[float]) -> FitResult:
    """Fit A·cos(2πx/ν + φ) + B (parity-drive calibration fringe).

    Raises:
        FitError: Fewer than 5 points, no spectral peak or non-convergence
    """
    xs, ys = _prepare(x, y, 5)
    f0 = _spectral_peak(xs, ys)
    theta = 2.0 * np.pi * f0 * xs
    design = np.column_stack([np.cos(theta), -np.sin(theta), np.ones_like(xs)])
    (a, b, c), *_ = np.linalg.lstsq(design, ys, rcond=None)
    amp0, phase0 = _quadrature_amplitude(float(a), float(b))
    seed = {"amplitude": amp0, "period": 1.0 / f0, "phase": phase0, "offset": float(c)}

    params, errors, residual, converged = _least_squares("cosine", cosine_model, xs, ys, seed)
    if params["amplitude"] < 0.0:
        params["amplitude"] = -params["amplitude"]
        params["phase"] += math.pi
    if params["period"] < 0.0:
        params["period"] = -params["period"]
        params["phase"] = -params["phase"]
    params["phase"] = _wrap_phase(params["phase"])
    return FitResult("cosine", params, errors, residual, converged)


def _moments(x: np.ndarray, weights: np.ndarray) -> tuple[float, float]:
    total = float(np.sum(weights))
    if total <= 0.0:
        return float(np.mean(x)), float(np.ptp(x)) / 6.0
    mean = float(np.sum(x * weights) / total)
    var = float(np.sum((x - mean) ** 2 * weights) / total)
    return mean, math.sqrt(var) if var > 0.0 else float(np.ptp(x)) / 6.0


def fit_gaussian(x: Sequence[float], y: Sequence[float]) -> FitResult:
    """Fit (A/σ√2π)·e^{−(x−µ)²/2σ²} + C.

    Raises:
        FitError: Fewer than 5 points, degenerate data or non-convergence
    """
    xs, ys = _prepare(x, y, 5)
    c0 = 0.5 * (ys[0] + ys[-1])
    weights = np.clip(ys - c0, 0.0, None)
    mu0, sigma0 = _moments(xs, weights)
    amp0 = (float(np.max(ys)) - c0) * sigma0 * SQRT_2PI
    seed = {"amplitude": amp0, "mean": mu0, "sigma": sigma0, "offset": c0}
    params, errors, residual, converged = _least_squares("gaussian", gaussian_model, xs, ys, seed)
    if params["sigma"] < 0.0:
        params["sigma"] = -params["sigma"]
        params["amplitude"] = -params["amplitude"]
    return FitResult("gaussian", params, errors, residual, converged)


def axis_scale_from_vacuum(x: Sequence[float], w: Sequence[float]) -> float:
    """Factor that rescales the displacement axis so a vacuum cut has σ = 1/2.

    Multiply raw axis values by the returned factor before fitting cat cuts.

    Raises:
        FitError: If the vacuum fit fails or gives a non-positive width
    """
    result = fit_gaussian(x, w)
    sigma = result.value("sigma")
    if sigma <= 0.0:
        raise FitError("Vacuum fit returned a non-positive width")
    return 0.5 / sigma


def fit_cat_cut(x: Sequence[float], w: Sequence[float]) -> FitResult:
    """Fit a Wigner cut through a cat with (A/σ√2π)·e^{−(x−µ)²/2σ²}·sin(f·x + φ).

    The axis must already be calibrated (vacuum σ = 1/2). The cat size
    S = f²/4 and its uncertainty f·σ_f/2 are reported in ``derived``.

    Raises:
        FitError: Degenerate data, unresolvable fringes or non-convergence
    """
    xs, ws = _prepare(x, w, 8)
    try:
        f0 = 2.0 * np.pi * _spectral_peak(xs, ws)
    except FitError as e:
        raise FitError(f"Fringe frequency not resolvable: {e}") from e
    mu0, sigma0 = _moments(xs, np.abs(ws))
    if not 0.0 < sigma0 < np.ptp(xs):
        sigma0 = 0.5
    envelope = gaussian_model(xs, 1.0, mu0, sigma0, 0.0)
    design = np.column_stack([envelope * np.sin(f0 * xs), envelope * np.cos(f0 * xs)])
    (a, b), *_ = np.linalg.lstsq(design, ws, rcond=None)
    amp0 = math.hypot(float(a), float(b))
    phase0 = math.atan2(float(b), float(a))
    seed = {"amplitude": amp0, "mean": mu0, "sigma": sigma0, "frequency": f0, "phase": phase0}

    params, errors, residual, converged = _least_squares(
        "cat_cut", modulated_gaussian_model, xs, ws, seed
    )
    if params["sigma"] < 0.0:
        params["sigma"] = -params["sigma"]
        params["amplitude"] = -params["amplitude"]
    if params["frequency"] < 0.0:
        params["frequency"] = -params["frequency"]
        params["phase"] = math.pi - params["phase"]
    if params["amplitude"] < 0.0:
        params["amplitude"] = -params["amplitude"]
        params["phase"] += math.pi
    params["phase"] = _wrap_phase(params["phase"])
    f = params["frequency"]
    derived = {"cat_size": f**2 / 4.0, "cat_size_uncertainty": f * errors["frequency"] / 2.0}
    logger.info("cat cut fit: f=%.6g, S=%.6g", f, derived["cat_size"])
    return FitResult("cat_cut", params, errors, residual, converged, derived)


def fit_linear_through_origin(x: Sequence[float], y: Sequence[float]) -> FitResult:
    """Least-squares slope of y = k·x with its standard error.

    Raises:
        FitError: Fewer than 2 points or all x zero
    """
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.shape != ys.shape or xs.size < 2:
        raise FitError("Need at least 2 paired points")
    sxx = float(np.sum(xs**2))
    if sxx == 0.0:
        raise FitError("Degenerate data: all x are zero")
    slope = float(np.sum(xs * ys)) / sxx
    residuals = ys - slope * xs
    sigma = math.sqrt(float(np.sum(residuals**2)) / (xs.size - 1) / sxx)
    return FitResult(
        "linear_origin",
        {"slope": slope},
        {"slope": sigma},
        float(np.linalg.norm(residuals)),
    )


FITTERS: dict[str, Callable[[Sequence[float], Sequence[float]], FitResult]] = {
    "exponential": fit_exponential,
    "exp_cos": fit_exp_cos,
    "cosine": fit_cosine,
    "gaussian": fit_gaussian,
    "cat_cut": fit_cat_cut,
    "linear_origin": fit_linear_through_origin,
}
