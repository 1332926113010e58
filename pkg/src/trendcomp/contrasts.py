"""Contrast families on the dose scale and the maxT test report.

Contrasts act on the per-group log odds from a saturated fit.  Two stock
families are provided: many-to-one (each dose against control) and the
ordered family of Williams type, whose rows compare the control with
sample-size weighted means of the q highest dose groups.  Rows are ordered
so that the first row involves the highest dose alone; under a monotone
dose response this row carries the trend signal.

All tests are one-sided against increase.  The joint reference is the
multivariate normal law of the standardized contrasts with the correlation
implied by the fit, so adjusted p-values account for the dependence among
the comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .model import ModelFit
from .mvn import DEFAULT_ABS_TOL, DEFAULT_MAX_POINTS, MvnSpec, adjust_maxt

__all__ = [
    "ContrastError",
    "ContrastMatrix",
    "TestReport",
    "dunnett_matrix",
    "williams_matrix",
    "single_contrast",
    "pad_to_full",
    "contrast_moments",
    "contrast_test",
]

_ROW_SUM_TOL = 1e-12


class ContrastError(ValueError):
    """A contrast matrix or its sampling moments are unusable."""


@dataclass(frozen=True)
class ContrastMatrix:
    """Named rows of contrast coefficients over the treatment groups."""

    names: tuple
    coefficients: np.ndarray
    kind: str

    def __post_init__(self):
        C = np.array(self.coefficients, dtype=np.float64)
        if C.ndim != 2 or C.shape[0] < 1 or C.shape[1] < 2:
            raise ContrastError("coefficients must be a matrix with >= 1 row and >= 2 columns")
        if not np.all(np.isfinite(C)):
            raise ContrastError("coefficients must be finite")
        names = tuple(str(s) for s in self.names)
        if len(names) != C.shape[0]:
            raise ContrastError(
                f"got {len(names)} names for {C.shape[0]} contrast rows"
            )
        sums = C.sum(axis=1)
        if np.any(np.abs(sums) > _ROW_SUM_TOL):
            bad = int(np.argmax(np.abs(sums)))
            raise ContrastError(
                f"contrast {names[bad]!r} coefficients sum to {sums[bad]:.3e}, not 0"
            )
        for i, name in enumerate(names):
            if not (np.any(C[i] > 0.0) and np.any(C[i] < 0.0)):
                raise ContrastError(
                    f"contrast {name!r} needs at least one positive and one negative weight"
                )
        C.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "coefficients", C)
        object.__setattr__(self, "kind", str(self.kind))

    @property
    def n_rows(self) -> int:
        return self.coefficients.shape[0]

    @property
    def n_groups(self) -> int:
        return self.coefficients.shape[1]


def dunnett_matrix(n) -> ContrastMatrix:
    """Many-to-one contrasts: dose i minus control, for i = 1..k.

    ``n`` gives the group sample sizes, control first; only its length
    matters for this family.
    """
    k = len(n) - 1
    if k < 1:
        raise ContrastError("need a control group and at least one dose group")
    C = np.zeros((k, k + 1))
    names = []
    for i in range(1, k + 1):
        C[i - 1, 0] = -1.0
        C[i - 1, i] = 1.0
        names.append(f"D{i}-C")
    return ContrastMatrix(names=tuple(names), coefficients=C, kind="dunnett")


def williams_matrix(n) -> ContrastMatrix:
    """Ordered contrasts of Williams type, highest dose first.

    Row q compares the control with the sample-size weighted mean of the
    q highest dose groups: row 1 is dose k alone, row 2 pools doses k-1
    and k, and the last row pools all doses.  Weights are n_j over the
    pooled total, so the pooled side is the weighted mean response of the
    included groups.
    """
    n = np.asarray(n, dtype=np.float64)
    k = n.size - 1
    if k < 1:
        raise ContrastError("need a control group and at least one dose group")
    if np.any(n <= 0):
        raise ContrastError("group sample sizes must be positive")
    C = np.zeros((k, k + 1))
    names = []
    for q in range(1, k + 1):
        lo = k - q + 1
        total = n[lo:].sum()
        C[q - 1, 0] = -1.0
        C[q - 1, lo:] = n[lo:] / total
        names.append(f"D{lo}:{k}-C" if lo < k else f"D{k}-C")
    return ContrastMatrix(names=tuple(names), coefficients=C, kind="williams")


def single_contrast(n_groups: int, i: int) -> ContrastMatrix:
    """The single comparison of dose ``i`` against the control."""
    if not 1 <= i <= n_groups - 1:
        raise ContrastError(f"dose index {i} out of range 1..{n_groups - 1}")
    C = np.zeros((1, n_groups))
    C[0, 0] = -1.0
    C[0, i] = 1.0
    return ContrastMatrix(names=(f"D{i}-C",), coefficients=C, kind="pairwise")


def pad_to_full(cm: ContrastMatrix, n_groups: int) -> ContrastMatrix:
    """Embed a contrast matrix on the first groups into ``n_groups`` columns.

    Appended columns carry zero weight, so the padded matrix expresses the
    same comparisons inside a larger design.
    """
    if n_groups < cm.n_groups:
        raise ContrastError(
            f"cannot pad {cm.n_groups} columns down to {n_groups}"
        )
    if n_groups == cm.n_groups:
        return cm
    C = np.zeros((cm.n_rows, n_groups))
    C[:, : cm.n_groups] = cm.coefficients
    return ContrastMatrix(names=cm.names, coefficients=C, kind=cm.kind)


def contrast_moments(coefficients: np.ndarray, eta: np.ndarray, var_eta: np.ndarray):
    """Estimates, standard errors, statistics and correlation of contrasts.

    Works directly from per-group means and variances, which is all the
    diagonal covariance of a saturated fit requires.  Returns the tuple
    (estimate, std_err, statistic, correlation).
    """
    C = np.asarray(coefficients, dtype=np.float64)
    est = C @ eta
    var = (C * C) @ var_eta
    if np.any(var <= 0.0):
        bad = int(np.argmin(var))
        raise ContrastError(f"contrast row {bad} has zero variance")
    se = np.sqrt(var)
    t = est / se
    cov = (C * var_eta) @ C.T
    R = cov / np.outer(se, se)
    R = 0.5 * (R + R.T)
    np.clip(R, -1.0, 1.0, out=R)
    np.fill_diagonal(R, 1.0)
    return est, se, t, R


@dataclass(frozen=True)
class TestReport:
    """Per-contrast results of a maxT multiple-contrast test."""

    contrasts: ContrastMatrix
    estimate: np.ndarray
    std_err: np.ndarray
    statistic: np.ndarray
    correlation: np.ndarray
    p_raw: np.ndarray
    p_adjusted: np.ndarray

    @property
    def min_adjusted(self) -> float:
        """The smallest adjusted p-value, the family-level p of the test."""
        return float(self.p_adjusted.min())


def contrast_test(
    fit: ModelFit,
    contrasts: ContrastMatrix,
    *,
    seed=0,
    abs_tol: float = DEFAULT_ABS_TOL,
    max_points: int = DEFAULT_MAX_POINTS,
) -> TestReport:
    """Run a one-sided maxT test of the given contrasts on a fitted model."""
    if contrasts.n_groups != fit.eta.size:
        raise ContrastError(
            f"contrast matrix has {contrasts.n_groups} columns "
            f"but the fit has {fit.eta.size} groups"
        )
    est, se, t, R = contrast_moments(contrasts.coefficients, fit.eta, fit.var_eta)
    spec = MvnSpec(R)
    p_adj = adjust_maxt(t, spec, seed=seed, abs_tol=abs_tol, max_points=max_points)
    for arr in (est, se, t, R, p_adj):
        arr.setflags(write=False)
    p_raw = ndtr(-t)
    p_raw.setflags(write=False)
    return TestReport(
        contrasts=contrasts,
        estimate=est,
        std_err=se,
        statistic=t,
        correlation=R,
        p_raw=p_raw,
        p_adjusted=p_adj,
    )
