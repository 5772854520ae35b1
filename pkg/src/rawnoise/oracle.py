"""Statistical noise-parameter estimation from controlled frame sets.

These estimators calibrate the noise components one at a time from flat
and dark frames, exactly the way a camera noise-model dataset is built:
the color bias is measured first and subtracted, the row component is
isolated from dark-frame row statistics, and the gain plus the total
signal-independent std come from photon-transfer regression of per-level
variance against signal level.  No learning is involved, so the composed
estimate doubles as the ground-truth oracle for the learned estimator.

All reductions sort their inputs first, making every estimate bit-identical
under any permutation of frames (or of frames within a level).
"""

from __future__ import annotations

import logging
import math

import numpy as np

from .errors import DomainError, InsufficientDataError
from .noise_core import NoiseParams, as_patch

logger = logging.getLogger(__name__)

# NoiseParams requires K > 0; a vanishing photon-transfer slope is reported
# as this floor instead of zero.
GAIN_FLOOR = 1e-12

MIN_PACKED_WIDTH = 8  # 16 physical columns


def _stable_mean(values: np.ndarray) -> float:
    # Sorting canonicalizes the summation order for any input permutation.
    return float(np.sort(values, axis=None).sum() / values.size)


def _stable_var(values: np.ndarray, ddof: int = 1) -> float:
    flat = np.sort(values, axis=None)
    mean = flat.sum() / flat.size
    dev = np.sort((flat - mean) ** 2)
    return float(dev.sum() / (flat.size - ddof))


def _physical_row_means(patch: np.ndarray) -> np.ndarray:
    """Means of the 2H physical bayer rows of a packed patch."""
    upper = patch[0:2].mean(axis=(0, 2))  # bayer rows 2j: channels R, Gr
    lower = patch[2:4].mean(axis=(0, 2))  # bayer rows 2j+1: channels Gb, B
    return np.concatenate([upper, lower])


def _physical_col_means(patch: np.ndarray) -> np.ndarray:
    """Means of the 2W physical bayer columns of a packed patch."""
    even = patch[0::2].mean(axis=(0, 1))  # bayer cols 2i: channels R, Gb
    odd = patch[1::2].mean(axis=(0, 1))  # bayer cols 2i+1: channels Gr, B
    return np.concatenate([even, odd])


def estimate_gain_and_read(flat_series) -> tuple[float, float]:
    """Photon-transfer estimate of (K, total signal-independent std).

    Args:
        flat_series: iterable of ``(clean_level, frames)`` with at least two
            distinct levels and two frames per level; frames are packed
            patches synthesized/captured flat at that level.

    Per-level pooled pixel variance is regressed against level: the slope
    is the gain K and the intercept is ``sigma^2 + sigma_r^2``.  A negative
    intercept is floored at zero with a warning.
    """
    series = [(float(level), [as_patch(f) for f in frames]) for level, frames in flat_series]
    levels = np.array([level for level, _ in series], dtype=np.float64)
    if np.unique(levels).size < 2:
        raise InsufficientDataError("photon transfer needs >= 2 distinct flat levels")
    for level, frames in series:
        if len(frames) < 2:
            raise InsufficientDataError(f"level {level} has fewer than 2 frames")

    variances = np.array(
        [_stable_var(np.stack(frames)) for _, frames in series], dtype=np.float64
    )

    level_mean = levels.mean()
    s_cc = float(np.sum((levels - level_mean) ** 2))
    slope = float(np.sum((levels - level_mean) * (variances - variances.mean())) / s_cc)
    intercept = float(variances.mean() - slope * level_mean)
    if intercept < 0:
        logger.warning("negative photon-transfer intercept %g floored at 0", intercept)
        intercept = 0.0
    return slope, math.sqrt(intercept)


def estimate_row_sigma(dark_frames) -> float:
    """Row-noise std from dark frames via row-mean variance.

    The variance of physical-row means is ``sigma_r^2 + sigma^2 / W`` for
    W pixels per physical row; the per-pixel term is removed using the
    within-frame variance of physical-column means, whose expectation is
    ``sigma^2 / H`` (the shared row offsets cancel out of the within-frame
    spread).  The corrected value is floored at zero before the root.
    """
    frames = [as_patch(f) for f in dark_frames]
    if not frames:
        raise InsufficientDataError("need at least one dark frame")
    if frames[0].shape[2] < MIN_PACKED_WIDTH:
        raise DomainError(
            f"row-noise estimation needs packed width >= {MIN_PACKED_WIDTH}, "
            f"got {frames[0].shape[2]}"
        )

    phys_rows = 2 * frames[0].shape[1]
    phys_cols = 2 * frames[0].shape[2]
    v_row = _stable_mean(
        np.array([np.var(_physical_row_means(f), ddof=1) for f in frames])
    )
    v_col = _stable_mean(
        np.array([np.var(_physical_col_means(f), ddof=1) for f in frames])
    )
    sigma_sq = phys_rows * v_col
    return math.sqrt(max(0.0, v_row - sigma_sq / phys_cols))


def estimate_color_bias(dark_frames) -> float:
    """Global mean of all dark-frame pixels."""
    frames = [as_patch(f) for f in dark_frames]
    if not frames:
        raise InsufficientDataError("need at least one dark frame")
    return _stable_mean(np.stack(frames))


def estimate_params_oracle(flat_series, dark_frames) -> NoiseParams:
    """Compose the component estimators into a full parameter tuple.

    The bias is estimated first and subtracted from every frame before the
    remaining components are measured; the read std is recovered from the
    photon-transfer intercept by removing the row variance.  The returned
    tuple always satisfies the parameter invariants (K floored at
    ``GAIN_FLOOR``, sigmas at zero).
    """
    dark_frames = [as_patch(f) for f in dark_frames]
    mu_c = estimate_color_bias(dark_frames)

    darks_centered = [f - mu_c for f in dark_frames]
    sigma_r = estimate_row_sigma(darks_centered)

    flats_centered = [(level, [as_patch(f) - mu_c for f in frames]) for level, frames in flat_series]
    gain, sigma_total = estimate_gain_and_read(flats_centered)
    sigma = math.sqrt(max(0.0, sigma_total**2 - sigma_r**2))

    return NoiseParams(K=max(gain, GAIN_FLOOR), sigma=sigma, mu_c=mu_c, sigma_r=sigma_r)
