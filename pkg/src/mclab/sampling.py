"""Observation masks, including masks that depend on the matrix values.

Four schemes are provided:

* ``relu``: observe exactly the nonnegative entries (deterministic).
* ``group-specific``: Bernoulli mask on a ratings matrix, keeping extreme
  ratings in [1, 2] or [4, 5] with probability 0.8 and moderate ratings in
  (2, 4) with probability 0.2.
* ``mean-centric``: observe the entries of smallest magnitude, with the
  threshold calibrated so an exact target count is kept (deterministic).
* ``uniform``: fixed-size uniform sample of index pairs, independent of the
  matrix values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ObservationSet, as_matrix

RELU = "relu"
GROUP_SPECIFIC = "group-specific"
MEAN_CENTRIC = "mean-centric"
UNIFORM = "uniform"
SCHEMES = (RELU, GROUP_SPECIFIC, MEAN_CENTRIC, UNIFORM)


@dataclass(frozen=True)
class SamplingSpec:
    """Mask scheme plus the knobs the random schemes need.

    ``gs_bands`` are the edges (lo, mid_lo, mid_hi, hi) of the extreme rating
    bands [lo, mid_lo] and [mid_hi, hi]; everything strictly between mid_lo
    and mid_hi is moderate. ``center_on_mean`` switches the mean-centric
    scheme from thresholding |x| to thresholding |x - mean(X)|.
    ``bernoulli`` switches the uniform scheme from a fixed-size sample to an
    independent per-entry coin flip with probability ``target_fraction``.
    """

    scheme: str
    seed: int = 0
    target_fraction: float = 0.5
    p_extreme: float = 0.8
    p_moderate: float = 0.2
    gs_bands: tuple[float, float, float, float] = (1.0, 2.0, 4.0, 5.0)
    center_on_mean: bool = False
    bernoulli: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}, expected one of {SCHEMES}")
        if not 0.0 < self.target_fraction <= 1.0:
            raise ValueError("target_fraction must be in (0, 1]")
        for p in (self.p_extreme, self.p_moderate):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")
        lo, a, b, hi = self.gs_bands
        if not lo <= a < b <= hi:
            raise ValueError(f"invalid rating bands {self.gs_bands}")


def mask_relu(X) -> ObservationSet:
    """Observe exactly the entries with x_ij >= 0."""
    X = as_matrix(X)
    mask = X >= 0.0
    if not mask.any():
        raise ValueError("all entries are negative: empty observation set, problem ill-posed")
    return ObservationSet.from_mask(X, mask)


def mask_group_specific(X, spec: SamplingSpec) -> ObservationSet:
    """Bernoulli mask with high probability on extreme ratings, low on moderate ones."""
    X = as_matrix(X)
    lo, a, b, hi = spec.gs_bands
    if X.min() < lo or X.max() > hi:
        raise ValueError(f"entries outside [{lo}, {hi}]: group-specific sampling is undefined")
    extreme = (X <= a) | (X >= b)
    probs = np.where(extreme, spec.p_extreme, spec.p_moderate)
    rng = np.random.default_rng(spec.seed)
    mask = rng.random(X.shape) < probs
    if not mask.any():
        raise ValueError("empty observation set drawn; retry with another seed")
    return ObservationSet.from_mask(X, mask)


def calibrate_alpha(X, target_fraction: float, center: float = 0.0) -> float:
    """Magnitude threshold keeping ceil(target_fraction * m * n) entries.

    Returns the k-th smallest value of |x_ij - center| where
    k = ceil(target_fraction * m * n); thresholding at this value observes
    exactly k entries whenever the magnitudes are distinct.
    """
    X = as_matrix(X)
    if not 0.0 < target_fraction <= 1.0:
        raise ValueError("target_fraction must be in (0, 1]")
    mag = np.abs(X - center).ravel()
    k = math.ceil(target_fraction * mag.size)
    return float(np.partition(mag, k - 1)[k - 1])


def mask_mean_centric(X, spec: SamplingSpec) -> ObservationSet:
    """Observe the ceil(target_fraction * m * n) entries of smallest magnitude.

    Magnitudes are measured around zero, or around the matrix mean when
    ``spec.center_on_mean`` is set. Ties at the threshold are broken in
    row-major index order, so the count is exact and deterministic.
    """
    X = as_matrix(X)
    center = float(X.mean()) if spec.center_on_mean else 0.0
    mag = np.abs(X - center).ravel()
    k = math.ceil(spec.target_fraction * mag.size)
    keep = np.sort(np.argsort(mag, kind="stable")[:k])
    rows, cols = np.unravel_index(keep, X.shape)
    return ObservationSet.from_indices(X, rows, cols)


def mask_uniform(shape: tuple[int, int], spec: SamplingSpec) -> tuple[np.ndarray, np.ndarray]:
    """Uniform index sample that never looks at the matrix values.

    Returns sorted (rows, cols) index arrays; the caller attaches values via
    :func:`observe`. By default the sample has exactly
    floor(target_fraction * m * n) pairs drawn without replacement; with
    ``spec.bernoulli`` each entry is included independently with probability
    ``target_fraction``.
    """
    m, n = shape
    if m < 1 or n < 1:
        raise ValueError(f"invalid shape {shape}")
    rng = np.random.default_rng(spec.seed)
    if spec.bernoulli:
        flat = np.nonzero(rng.random(m * n) < spec.target_fraction)[0]
        if flat.size == 0:
            raise ValueError("empty observation set drawn; retry with another seed")
    else:
        count = int(spec.target_fraction * m * n)
        if count < 1:
            raise ValueError("target_fraction too small: no entries observed")
        flat = np.sort(rng.choice(m * n, size=count, replace=False))
    return np.divmod(flat, n)


def observe(X, rows, cols) -> ObservationSet:
    """Attach values from X to an index sample."""
    return ObservationSet.from_indices(X, rows, cols)


def sample_observations(X, spec: SamplingSpec) -> ObservationSet:
    """Build the observation set for X under the given scheme."""
    X = as_matrix(X)
    if spec.scheme == RELU:
        return mask_relu(X)
    if spec.scheme == GROUP_SPECIFIC:
        return mask_group_specific(X, spec)
    if spec.scheme == MEAN_CENTRIC:
        return mask_mean_centric(X, spec)
    rows, cols = mask_uniform(X.shape, spec)
    return observe(X, rows, cols)
