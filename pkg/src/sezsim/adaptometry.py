"""Correlation structure of the parameter matrix and the integral indicator.

Columns of the parameter matrix are monthly snapshots of the enterprise's
budget lines; the Pearson correlation across lines between two periods
measures how stable the internal structure is.  Summing correlation mass
over the whole horizon gives the integral indicator, which drops when an
external shock changes the rules the system lives by; the split of the
correlation matrix with maximal pre/cross contrast locates that change.

Conventions: periods are 1-based; a column whose values are (numerically)
constant across parameters carries no correlation information and
correlates 0 with everything, including itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, TYPE_CHECKING

import numpy as np

from .core import ParameterMatrix, ValidationError

if TYPE_CHECKING:  # pragma: no cover
    from .dynamics import Trajectory

INDICATOR_VARIANTS = ("total-abs", "row1-signed", "row-abs")

# A centered column with norm at or below scale * n * this factor is
# treated as zero-variance (constant up to rounding).
_ZERO_VARIANCE_RTOL = 1e-14


@dataclass(frozen=True)
class CorrelationMatrix:
    """t_max x t_max period-by-period correlation matrix of one enterprise."""

    enterprise_id: str
    r: np.ndarray

    def __post_init__(self):
        r = np.array(self.r, dtype=float)
        problems = []
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            problems.append(f"R must be square, got shape {r.shape}")
        else:
            if not np.all(np.isfinite(r)):
                problems.append("R must be finite")
            else:
                if np.max(np.abs(r - r.T)) > 1e-12:
                    problems.append("R must be symmetric to 1e-12")
                if np.any(r > 1.0) or np.any(r < -1.0):
                    problems.append("R entries must lie in [-1, 1]")
                diag = np.diag(r)
                # Unit diagonal except for zero-variance periods (exactly 0).
                if not np.all((np.abs(diag - 1.0) <= 1e-12) | (diag == 0.0)):
                    problems.append("diagonal entries must be 1 (or 0 for "
                                    "zero-variance periods)")
        if problems:
            raise ValidationError([f"{self.enterprise_id}: {p}" for p in problems])
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    @property
    def t_max(self) -> int:
        return self.r.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CorrelationMatrix):
            return NotImplemented
        return self.enterprise_id == other.enterprise_id and np.array_equal(self.r, other.r)

    __hash__ = None


@dataclass(frozen=True)
class IndicatorResult:
    """Integral indicator of one enterprise: per-period series and scalar."""

    enterprise_id: str
    variant: str
    series: np.ndarray
    scalar: float
    break_periods: tuple[int, ...] = ()

    def __post_init__(self):
        if self.variant not in INDICATOR_VARIANTS:
            raise ValidationError([f"unknown indicator variant {self.variant!r}"])
        series = np.array(self.series, dtype=float)
        series.setflags(write=False)
        object.__setattr__(self, "series", series)
        object.__setattr__(self, "break_periods", tuple(self.break_periods))
        if self.variant == "total-abs":
            t_max = series.shape[0]
            bound = t_max * (t_max - 1) / 2.0
            if not 0.0 <= self.scalar <= bound + 1e-9:
                raise ValidationError(
                    [f"total-abs scalar {self.scalar} outside [0, {bound}]"])


def build_parameter_matrix(trajectory: "Trajectory", enterprise_id: str,
                           selection: Sequence[str] | None = None) -> ParameterMatrix:
    """Extract (a row selection of) the realized matrix of one enterprise.

    selection is an ordered list of parameter names; None selects every
    row in trajectory order.
    """
    ent = trajectory.enterprise(enterprise_id)
    realized = ent.realized
    if selection is None:
        return realized
    names = list(selection)
    if not names:
        raise ValidationError([f"{enterprise_id}: parameter selection must be non-empty"])
    index = {name: i for i, name in enumerate(realized.parameter_names)}
    missing = [name for name in names if name not in index]
    if missing:
        raise ValidationError(
            [f"{enterprise_id}: unknown parameter {name!r}" for name in missing])
    rows = [index[name] for name in names]
    return ParameterMatrix(enterprise_id, tuple(names), realized.values[rows, :])


def _zero_variance_mask(values: np.ndarray, centered: np.ndarray) -> np.ndarray:
    """True for columns that are constant across parameters up to rounding."""
    norms = np.sqrt(np.sum(centered * centered, axis=0))
    scale = np.max(np.abs(values), axis=0)
    n = values.shape[0]
    return norms <= scale * n * _ZERO_VARIANCE_RTOL


def column_correlation(x: ParameterMatrix | np.ndarray, a: int, b: int) -> float:
    """Pearson correlation across parameters between periods a and b (1-based).

    Two-pass: column means first, then centered products.  A zero-variance
    column makes the correlation 0 by convention, including r(a, a).
    """
    values = x.values if isinstance(x, ParameterMatrix) else np.asarray(x, dtype=float)
    n, t_max = values.shape
    if n < 2:
        raise ValidationError([f"need at least 2 parameters, got {n}"])
    for t in (a, b):
        if not 1 <= t <= t_max:
            raise ValidationError([f"period {t} outside 1..{t_max}"])
    cols = values[:, [a - 1, b - 1]]
    centered = cols - np.mean(cols, axis=0)
    if np.any(_zero_variance_mask(cols, centered)):
        return 0.0
    if a == b:
        return 1.0
    num = float(np.dot(centered[:, 0], centered[:, 1]))
    den = float(np.sqrt(np.dot(centered[:, 0], centered[:, 0]))
                * np.sqrt(np.dot(centered[:, 1], centered[:, 1])))
    return float(min(1.0, max(-1.0, num / den)))


def correlation_matrix(x: ParameterMatrix) -> CorrelationMatrix:
    """All-pairs column correlation of a parameter matrix.

    Exactly symmetric (the upper triangle is mirrored), unit diagonal for
    columns with variance, zero rows/columns for zero-variance periods.
    """
    values = x.values
    n, t_max = values.shape
    if n < 2:
        raise ValidationError([f"{x.enterprise_id}: need at least 2 parameters, got {n}"])
    centered = values - np.mean(values, axis=0)
    zero_var = _zero_variance_mask(values, centered)
    norms = np.sqrt(np.sum(centered * centered, axis=0))
    safe = np.where(zero_var, 1.0, norms)
    unit = centered / safe
    r = unit.T @ unit
    np.clip(r, -1.0, 1.0, out=r)
    r[zero_var, :] = 0.0
    r[:, zero_var] = 0.0
    # Mirror the upper triangle and pin the diagonal so the matrix
    # invariants hold exactly, not just to rounding.
    upper = np.triu_indices(t_max, 1)
    r[(upper[1], upper[0])] = r[upper]
    diag = np.where(zero_var, 0.0, 1.0)
    np.fill_diagonal(r, diag)
    return CorrelationMatrix(x.enterprise_id, r)


def integral_indicator(corr: CorrelationMatrix,
                       variant: str = "total-abs") -> IndicatorResult:
    """Collapse the correlation matrix into a per-period series and a scalar.

    total-abs (default): G(t) sums |r| between period t and every other
    period; the scalar sums the upper triangle, so it counts each pair
    once and is bounded by t_max (t_max - 1) / 2.

    row1-signed: the literal first-row reading -- scalar is the signed sum
    of r(1, t) for t = 2..t_max, series its running partial sums.

    row-abs: the total-abs series with the scalar taken as half the series
    total (equal to the total-abs scalar).
    """
    if variant not in INDICATOR_VARIANTS:
        raise ValidationError([f"unknown indicator variant {variant!r}"])
    r = corr.r
    t_max = corr.t_max
    if variant == "row1-signed":
        firsts = r[0, 1:]
        series = np.concatenate([[0.0], np.cumsum(firsts)])
        scalar = float(series[-1])
        return IndicatorResult(corr.enterprise_id, variant, series, scalar)
    abs_r = np.abs(r)
    np.fill_diagonal(abs_r, 0.0)
    series = abs_r.sum(axis=1)
    if variant == "total-abs":
        scalar = float(abs_r[np.triu_indices(t_max, 1)].sum())
    else:  # row-abs
        scalar = float(series.sum() / 2.0)
    return IndicatorResult(corr.enterprise_id, variant, series, scalar)


def detect_structure_change(corr: CorrelationMatrix, drop_threshold: float,
                            min_segment: int | None = None) -> list[int]:
    """Locate the period where the correlation structure breaks.

    Every split t* partitions periods into pre (< t*) and post; the
    contrast compares the mean |r| inside the pre block against the mean
    |r| between pre and post periods.  The maximal-contrast split is
    returned (as a single-element list) when the cross-block mean falls
    short of the pre-block mean by at least drop_threshold times the
    pre-block mean; otherwise the list is empty.

    Candidate splits keep min_segment periods (default: 10% of the
    horizon) on each side, so a single fluke column cannot win the
    contrast; the pre block always spans at least two periods.
    """
    if not 0.0 < drop_threshold < 1.0:
        raise ValidationError([f"drop_threshold must be in (0, 1), got {drop_threshold}"])
    abs_r = np.abs(corr.r)
    np.fill_diagonal(abs_r, 0.0)
    t_max = corr.t_max
    trim = (max(1, -(-t_max // 10)) if min_segment is None
            else max(1, int(min_segment)))
    best_split = None
    best_contrast = -np.inf
    for split in range(max(3, trim + 1), t_max - trim + 2):
        k = split - 1  # number of pre periods
        pre_sum = float(np.sum(abs_r[:k, :k]))
        pre_mean = pre_sum / (k * (k - 1))
        if pre_mean <= 0.0:
            continue
        cross_mean = float(np.mean(abs_r[:k, k:]))
        contrast = (pre_mean - cross_mean) / pre_mean
        if contrast > best_contrast:
            best_contrast = contrast
            best_split = split
    if best_split is not None and best_contrast >= drop_threshold:
        return [best_split]
    return []


def export_surface(corr: CorrelationMatrix) -> list[tuple[int, int, float]]:
    """Flatten R into (t, s, r) grid rows in lexicographic (t, s) order."""
    r = corr.r
    t_max = corr.t_max
    return [(t, s, float(r[t - 1, s - 1]))
            for t in range(1, t_max + 1) for s in range(1, t_max + 1)]


def surface_to_matrix(rows: Iterable[tuple[int, int, float]],
                      enterprise_id: str = "") -> CorrelationMatrix:
    """Reassemble a correlation matrix from exported grid rows."""
    entries = list(rows)
    if not entries:
        raise ValidationError(["surface grid is empty"])
    t_max = max(t for t, _, _ in entries)
    r = np.full((t_max, t_max), np.nan)
    for t, s, value in entries:
        r[t - 1, s - 1] = value
    if np.any(np.isnan(r)):
        raise ValidationError(["surface grid does not cover every (t, s) pair"])
    return CorrelationMatrix(enterprise_id, r)
