"""Temperature calibration of softmax confidence.

Confidence of a prediction with winning score p_max over the top-k score
set a_k at temperature T:

    conf = exp(p_max/T) / sum_{s in a_k} exp(s/T)

computed via the max-shift exp((s - p_max)/T), which is algebraically
identical and cannot overflow. Its temperature derivative is

    d conf / dT = conf * (sbar - p_max) / T^2

with sbar the softmax-weighted mean of a_k; it is always <= 0.

Calibration quality is the bin-weighted mean SQUARED gap between per-bin
mean confidence and per-bin accuracy over N equal-width bins (bin i takes
confidences in [(i-1)/N, i/N), final bin closed at 1.0). Its temperature
gradient treats bin membership as fixed:

    d ece / dT = 2 * sum_i (|B_i|/K) (conf_i - acc_i) * mean_{j in B_i}(g_j)

Temperature is fit by plain gradient descent on that gradient, returning
the temperature with the lowest squared error seen along the trajectory
(large steps on this piecewise-smooth loss can overshoot).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError, InvariantError

T_MIN = 1e-3
T_MAX = 1e6
ECE_STOP_DELTA = 1e-10


@dataclass(frozen=True)
class ConfidenceInput:
    p_max: float
    a_k: np.ndarray
    temperature: float

    def __post_init__(self) -> None:
        scores = np.asarray(self.a_k, dtype=np.float64)
        object.__setattr__(self, "a_k", scores)
        if scores.size == 0:
            raise InputError("empty score set")
        if self.temperature <= 0:
            raise InputError(f"temperature must be > 0, got {self.temperature}")
        if self.p_max != float(scores.max()):
            raise InvariantError("p_max is not the maximum of the score set")

    @classmethod
    def from_scores(cls, scores, temperature: float) -> "ConfidenceInput":
        scores = np.asarray(scores, dtype=np.float64)
        if scores.size == 0:
            raise InputError("empty score set")
        return cls(float(scores.max()), scores, temperature)


@dataclass(frozen=True)
class LabeledPrediction:
    confidence: float
    correct: bool
    conf_gradient: float  # d confidence / dT at the current temperature


@dataclass
class CalibrationBinSet:
    bin_count: int
    counts: np.ndarray
    mean_confidence: np.ndarray  # 0 for empty bins
    accuracy: np.ndarray  # 0 for empty bins
    total: int

    def edges(self, i: int) -> tuple[float, float]:
        return i / self.bin_count, (i + 1) / self.bin_count


def confidence(inp: ConfidenceInput) -> float:
    """Softmax probability of the winning score at temperature T."""
    shifted = (inp.a_k - inp.p_max) / inp.temperature
    return float(1.0 / np.exp(shifted).sum())


def confidence_gradient(inp: ConfidenceInput) -> float:
    """Temperature derivative of `confidence`; exactly 0 for uniform scores."""
    weights = np.exp((inp.a_k - inp.p_max) / inp.temperature)
    weights /= weights.sum()
    sbar = float(weights @ inp.a_k)
    conf = float(weights[np.argmax(inp.a_k)])  # == confidence(inp)
    return conf * (sbar - inp.p_max) / inp.temperature**2


def _bin_of(conf: np.ndarray, bin_count: int) -> np.ndarray:
    return np.minimum((conf * bin_count).astype(np.intp), bin_count - 1)


def bin_predictions(
    preds: Sequence[LabeledPrediction], bin_count: int
) -> CalibrationBinSet:
    """Group predictions into equal-width confidence bins."""
    if bin_count < 1:
        raise InputError(f"bin count must be >= 1, got {bin_count}")
    conf = np.array([p.confidence for p in preds], dtype=np.float64)
    correct = np.array([p.correct for p in preds], dtype=np.float64)
    if conf.size and not np.all((conf > 0.0) & (conf <= 1.0)):
        raise InvariantError("confidences must lie in (0, 1]")
    counts = np.zeros(bin_count, dtype=np.intp)
    conf_sums = np.zeros(bin_count)
    correct_sums = np.zeros(bin_count)
    if conf.size:
        bins = _bin_of(conf, bin_count)
        np.add.at(counts, bins, 1)
        np.add.at(conf_sums, bins, conf)
        np.add.at(correct_sums, bins, correct)
    nonzero = np.maximum(counts, 1)
    return CalibrationBinSet(
        bin_count=bin_count,
        counts=counts,
        mean_confidence=np.where(counts > 0, conf_sums / nonzero, 0.0),
        accuracy=np.where(counts > 0, correct_sums / nonzero, 0.0),
        total=int(conf.size),
    )


def ece_squared(bins: CalibrationBinSet) -> float:
    """Bin-weighted mean squared confidence-accuracy gap, in [0, 1]."""
    if bins.total == 0:
        raise InputError("cannot compute calibration error of zero predictions")
    weights = bins.counts / bins.total
    return float(weights @ (bins.mean_confidence - bins.accuracy) ** 2)


def ece_absolute(bins: CalibrationBinSet) -> float:
    """Absolute-gap variant, reported for diagnostics only."""
    if bins.total == 0:
        raise InputError("cannot compute calibration error of zero predictions")
    weights = bins.counts / bins.total
    return float(weights @ np.abs(bins.mean_confidence - bins.accuracy))


def ece_gradient(bins: CalibrationBinSet, preds: Sequence[LabeledPrediction]) -> float:
    """Temperature gradient of `ece_squared` with bin membership held fixed.

    Empty bins are skipped (their weight is 0 and the formula averages the
    per-prediction gradients within each bin).
    """
    if bins.total != len(preds):
        raise InvariantError(
            f"bin set built from {bins.total} predictions, got {len(preds)}"
        )
    conf = np.array([p.confidence for p in preds], dtype=np.float64)
    grads = np.array([p.conf_gradient for p in preds], dtype=np.float64)
    membership = _bin_of(conf, bins.bin_count)
    recount = np.zeros(bins.bin_count, dtype=np.intp)
    np.add.at(recount, membership, 1)
    if not np.array_equal(recount, bins.counts):
        raise InvariantError("bin set inconsistent with predictions")
    grad_sums = np.zeros(bins.bin_count)
    np.add.at(grad_sums, membership, grads)
    total = 0.0
    for i in np.flatnonzero(bins.counts):
        weight = bins.counts[i] / bins.total
        gap = bins.mean_confidence[i] - bins.accuracy[i]
        total += weight * gap * (grad_sums[i] / bins.counts[i])
    return 2.0 * total


def _confidences_and_gradients(
    score_sets: list[np.ndarray], temperature: float
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized confidence and gradient for many score sets at one T."""
    lengths = {s.shape[0] for s in score_sets}
    if len(lengths) == 1:
        scores = np.stack(score_sets)
        p_max = scores.max(axis=1, keepdims=True)
        weights = np.exp((scores - p_max) / temperature)
        z = weights.sum(axis=1)
        conf = 1.0 / z
        sbar = (weights * scores).sum(axis=1) / z
        grad = conf * (sbar - p_max[:, 0]) / temperature**2
        return conf, grad
    conf = np.empty(len(score_sets))
    grad = np.empty(len(score_sets))
    for i, s in enumerate(score_sets):
        inp = ConfidenceInput.from_scores(s, temperature)
        conf[i] = confidence(inp)
        grad[i] = confidence_gradient(inp)
    return conf, grad


def labeled_predictions(
    score_sets: list[np.ndarray], correct: np.ndarray, temperature: float
) -> list[LabeledPrediction]:
    conf, grad = _confidences_and_gradients(score_sets, temperature)
    return [
        LabeledPrediction(float(c), bool(ok), float(g))
        for c, ok, g in zip(conf, correct, grad)
    ]


def calibrate_temperature(
    samples: Iterable[tuple[Sequence[float], bool]],
    t0: float = 0.1,
    step: float = 1e2,
    max_iters: int = 100,
    bin_count: int = 10,
) -> float:
    """Fit the softmax temperature by gradient descent on the squared error.

    Each sample is (score set, correct). Descent starts at `t0`, updates
    T <- T - step * gradient with T clamped to [1e-3, 1e6], stops at
    `max_iters` or when the error changes by less than 1e-10 between
    iterations, and returns the temperature with the lowest error observed.
    """
    samples = list(samples)
    if not samples:
        raise InputError("cannot calibrate on zero predictions")
    if t0 <= 0:
        raise InputError(f"t0 must be > 0, got {t0}")
    if step < 0:
        raise InputError(f"step must be >= 0, got {step}")
    score_sets = [np.asarray(s, dtype=np.float64) for s, _ in samples]
    if any(s.size == 0 for s in score_sets):
        raise InputError("empty score set in calibration samples")
    correct = np.array([ok for _, ok in samples], dtype=bool)

    temperature = float(t0)
    best_t = temperature
    best_ece = np.inf
    prev_ece = None
    for _ in range(max_iters):
        preds = labeled_predictions(score_sets, correct, temperature)
        bins = bin_predictions(preds, bin_count)
        err = ece_squared(bins)
        if err < best_ece:
            best_ece, best_t = err, temperature
        if prev_ece is not None and abs(err - prev_ece) < ECE_STOP_DELTA:
            break
        prev_ece = err
        gradient = ece_gradient(bins, preds)
        temperature = float(np.clip(temperature - step * gradient, T_MIN, T_MAX))
    return best_t


def reliability_report(bins: CalibrationBinSet) -> list[tuple[float, float, int, float, float]]:
    """Rows (bin_lo, bin_hi, count, mean_confidence, accuracy), in bin order."""
    rows = []
    for i in range(bins.bin_count):
        lo, hi = bins.edges(i)
        rows.append(
            (lo, hi, int(bins.counts[i]), float(bins.mean_confidence[i]), float(bins.accuracy[i]))
        )
    return rows


def write_reliability_csv(rows, path) -> None:
    """CSV dialect: fixed 6-decimal reals, header line, LF endings."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("bin_lo,bin_hi,count,mean_confidence,accuracy\n")
        for lo, hi, count, conf, acc in rows:
            fh.write(f"{lo:.6f},{hi:.6f},{count},{conf:.6f},{acc:.6f}\n")
