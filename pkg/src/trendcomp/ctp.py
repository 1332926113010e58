"""Closed testing for ordered binomial comparisons, plus the two baselines.

Under a monotone order restriction the closure over the per-dose
hypotheses H_i collapses to a chain of nested top segments: dose i is
claimed significant only if every segment hypothesis covering it,
{0..i} through {0..k}, is rejected.  The per-dose closed-test p-value is
therefore a running maximum over the chain, which makes the reported
vectors non-increasing in dose by construction.

Two instantiations of the intersection tests are provided.  Variant P
tests segment {0..j} with the single pairwise contrast of its highest
dose against control.  Variant C tests it with the global Williams trend
test on the segment, built from zero-padded contrasts so that every test
reuses the one saturated fit.  The bottom segment {0, 1} is the single
contrast D1 vs C in both variants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .contrasts import (
    TestReport,
    contrast_moments,
    contrast_test,
    dunnett_matrix,
    pad_to_full,
    williams_matrix,
)
from .data import DoseGroupData
from .model import ModelFit, fit_saturated_logit
from .mvn import DEFAULT_ABS_TOL, DEFAULT_MAX_POINTS, _as_seed_seq

__all__ = [
    "CtpResult",
    "raw_pairwise_pvalues",
    "ctp_pairwise",
    "ctp_williams",
    "dunnett_baseline",
    "williams_baseline",
    "closed_analysis",
]


def raw_pairwise_pvalues(fit: ModelFit) -> np.ndarray:
    """Unadjusted one-sided p-values of each dose-vs-control contrast."""
    cm = dunnett_matrix(np.ones(fit.n_groups))
    _, _, t, _ = contrast_moments(cm.coefficients, fit.eta, fit.var_eta)
    return ndtr(-t)


def ctp_pairwise(fit: ModelFit) -> np.ndarray:
    """Variant P: closed test with pairwise contrasts.

    Segment {0..j} is tested by the raw p of D_j vs C, so the per-dose
    value is the running maximum of the raw pairwise p-values from the
    top dose downward.  Exact given the fit; no integration involved.
    """
    raw = raw_pairwise_pvalues(fit)
    return np.maximum.accumulate(raw[::-1])[::-1]


def dunnett_baseline(
    fit: ModelFit,
    *,
    seed=0,
    abs_tol: float = DEFAULT_ABS_TOL,
    max_points: int = DEFAULT_MAX_POINTS,
) -> TestReport:
    """maxT-adjusted many-to-one comparisons without order restriction."""
    cm = dunnett_matrix(np.ones(fit.n_groups))
    return contrast_test(fit, cm, seed=seed, abs_tol=abs_tol, max_points=max_points)


def williams_baseline(
    fit: ModelFit,
    n,
    *,
    seed=0,
    abs_tol: float = DEFAULT_ABS_TOL,
    max_points: int = DEFAULT_MAX_POINTS,
):
    """Global Williams trend test on all groups.

    ``n`` supplies the group sample sizes for the pooling weights, which
    the fit alone does not carry.  Returns the per-contrast report and
    the global p, the smallest adjusted p-value of the family.
    """
    n = np.asarray(n, dtype=np.int64)
    if n.size != fit.n_groups:
        raise ValueError(f"got {n.size} sample sizes for {fit.n_groups} groups")
    cm = williams_matrix(n)
    report = contrast_test(fit, cm, seed=seed, abs_tol=abs_tol, max_points=max_points)
    return report, report.min_adjusted


def _segment_minima(
    fit: ModelFit,
    n: np.ndarray,
    children,
    williams_report: TestReport,
    abs_tol: float,
    max_points: int,
) -> np.ndarray:
    """S_j for the segment chain: raw D1 p, subset Williams minima, global."""
    k = fit.n_groups - 1
    S = np.empty(k)
    S[0] = float(raw_pairwise_pvalues(fit)[0])
    for j in range(2, k):
        sub = pad_to_full(williams_matrix(n[: j + 1]), fit.n_groups)
        rep = contrast_test(fit, sub, seed=children[j], abs_tol=abs_tol, max_points=max_points)
        S[j - 1] = rep.min_adjusted
    if k >= 2:
        S[k - 1] = williams_report.min_adjusted
    return S


def ctp_williams(
    fit: ModelFit,
    n,
    *,
    seed=0,
    abs_tol: float = DEFAULT_ABS_TOL,
    max_points: int = DEFAULT_MAX_POINTS,
) -> np.ndarray:
    """Variant C: closed test with subset Williams trend tests.

    The per-dose value is the running maximum of the segment p-values
    S_i..S_k, so it is non-increasing in dose and its top entry equals
    the global Williams p exactly.
    """
    n = np.asarray(n, dtype=np.int64)
    if n.size != fit.n_groups:
        raise ValueError(f"got {n.size} sample sizes for {fit.n_groups} groups")
    k = fit.n_groups - 1
    children = _as_seed_seq(seed).spawn(k + 1)
    report, _ = williams_baseline(
        fit, n, seed=children[k], abs_tol=abs_tol, max_points=max_points
    )
    S = _segment_minima(fit, n, children, report, abs_tol, max_points)
    return np.maximum.accumulate(S[::-1])[::-1]


@dataclass(frozen=True)
class CtpResult:
    """All four procedures on one dataset, one row per dose."""

    control_label: str
    dose_labels: tuple
    p_dunnett: np.ndarray
    p_williams_rows: np.ndarray
    p_williams_global: float
    p_ctp_pairwise: np.ndarray
    p_ctp_williams: np.ndarray
    alpha: float
    seed: int
    boundary_policy: str
    correction_applied: np.ndarray
    dunnett_report: TestReport
    williams_report: TestReport

    def __post_init__(self):
        k = len(self.dose_labels)
        for name in ("p_dunnett", "p_ctp_pairwise", "p_ctp_williams"):
            p = getattr(self, name)
            if p.shape != (k,):
                raise ValueError(f"{name} must have one entry per dose")
            if np.any(p < 0.0) or np.any(p > 1.0):
                raise ValueError(f"{name} entries must lie in [0, 1]")
        for name in ("p_ctp_pairwise", "p_ctp_williams"):
            if np.any(np.diff(getattr(self, name)) > 0.0):
                raise ValueError(f"{name} must be non-increasing in dose")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")

    @property
    def k(self) -> int:
        return len(self.dose_labels)


def closed_analysis(
    data: DoseGroupData,
    *,
    alpha: float = 0.05,
    boundary_policy: str = "haldane",
    seed: int = 0,
    abs_tol: float = DEFAULT_ABS_TOL,
    max_points: int = DEFAULT_MAX_POINTS,
) -> CtpResult:
    """Run Dunnett, Williams and both closed-test variants on one dataset.

    A single saturated fit feeds every procedure.  Independent seed
    streams are derived per contrast family from ``seed``, so the whole
    result is reproducible from one integer.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    fit = fit_saturated_logit(data, boundary_policy=boundary_policy)
    k = data.k
    children = _as_seed_seq(seed).spawn(k + 1)
    dunnett_report = contrast_test(
        fit,
        dunnett_matrix(data.n),
        seed=children[0],
        abs_tol=abs_tol,
        max_points=max_points,
    )
    williams_report, williams_global = williams_baseline(
        fit, data.n, seed=children[k], abs_tol=abs_tol, max_points=max_points
    )
    S = _segment_minima(fit, data.n, children, williams_report, abs_tol, max_points)
    p_c = np.maximum.accumulate(S[::-1])[::-1]
    for arr in (p_c,):
        arr.setflags(write=False)
    return CtpResult(
        control_label=data.labels[0],
        dose_labels=data.labels[1:],
        p_dunnett=dunnett_report.p_adjusted,
        p_williams_rows=williams_report.p_adjusted,
        p_williams_global=williams_global,
        p_ctp_pairwise=ctp_pairwise(fit),
        p_ctp_williams=p_c,
        alpha=alpha,
        seed=seed,
        boundary_policy=boundary_policy,
        correction_applied=fit.correction_applied,
        dunnett_report=dunnett_report,
        williams_report=williams_report,
    )
