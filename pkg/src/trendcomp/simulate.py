"""Monte Carlo estimation of per-pair power, any-pair power and FWER.

Each replicate draws independent binomial counts, fits the saturated
model and records which dose-level claims every procedure makes at the
scenario alpha.  Decisions, not p-values, are accumulated: each maxT
decision is settled from the exact envelope p_raw <= p_adj <= m * p_raw
whenever possible and integrated at the scenario tolerance only in the
borderline band, which keeps full scenarios fast without changing any
decision relative to thresholding the adjusted p-values.

The default boundary policy here is ``smooth`` (one pseudo-responder
and one pseudo-non-responder added to every group), not the analysis
default ``haldane``.  At the small response rates where power studies
operate, zero counts are routine, and a correction applied only to the
affected groups hands those replicates an outsized log-odds shift that
inflates every rejection rate; smoothing all groups by the same rule
keeps boundary replicates comparable with interior ones.

Reproducibility contract: every replicate derives its generator from
(scenario seed, replicate index) alone, and results reduce by integer
count accumulation, so output is bit-identical for any parallelism
level and any chunking of the replicate range.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml
from scipy.special import ndtr

from .contrasts import contrast_moments, dunnett_matrix, pad_to_full, williams_matrix
from .model import BOUNDARY_POLICIES
from .mvn import MvnSpec, adjusted_p_below

__all__ = [
    "SCHEMA_VERSION",
    "Scenario",
    "ScenarioResult",
    "StudyConfigError",
    "run_scenario",
    "run_study",
    "load_study",
]

SCHEMA_VERSION = 1

DEFAULT_REPLICATES = 5000
DEFAULT_MVN_TOL = 1e-3

_CHUNK = 512


class StudyConfigError(ValueError):
    """A study configuration file is malformed or inconsistent."""


@dataclass(frozen=True)
class Scenario:
    """One simulation cell: true probabilities, sizes and run settings."""

    pi: tuple
    n: tuple
    replicates: int = DEFAULT_REPLICATES
    alpha: float = 0.05
    seed: int = 0
    boundary_policy: str = "smooth"
    mvn_tol: float = DEFAULT_MVN_TOL
    name: str = ""

    def __post_init__(self):
        pi = tuple(float(p) for p in self.pi)
        n = tuple(int(v) for v in self.n)
        if len(pi) < 2:
            raise ValueError("pi needs a control group and at least one dose group")
        if len(pi) != len(n):
            raise ValueError(f"pi has {len(pi)} entries but n has {len(n)}")
        if any(not 0.0 < p < 1.0 for p in pi):
            raise ValueError("every pi must lie strictly in (0, 1)")
        if any(v < 1 for v in n):
            raise ValueError("every group size must be >= 1")
        if int(self.replicates) < 1:
            raise ValueError("replicates must be >= 1")
        if not 0.0 < float(self.alpha) < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if int(self.seed) < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.boundary_policy not in BOUNDARY_POLICIES:
            raise ValueError(
                f"boundary_policy must be one of {BOUNDARY_POLICIES}, got {self.boundary_policy!r}"
            )
        if not float(self.mvn_tol) > 0.0:
            raise ValueError("mvn_tol must be positive")
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "replicates", int(self.replicates))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "mvn_tol", float(self.mvn_tol))
        object.__setattr__(self, "name", str(self.name))

    @property
    def k(self) -> int:
        return len(self.pi) - 1


@dataclass(frozen=True)
class ScenarioResult:
    """Estimated rejection rates for one scenario.

    Per-dose entries are the probabilities of claiming that specific dose
    significant; ``*_any`` entries are the probabilities of claiming any
    dose at all.  For the Williams procedure ``rate_williams_top`` is the
    decision of its highest-dose contrast row and ``rate_williams_any``
    the decision of the global trend test.  ``elapsed`` is wall time in
    seconds and deliberately stays out of :meth:`to_dict`.
    """

    scenario: Scenario
    rate_dunnett: np.ndarray
    rate_dunnett_any: float
    rate_williams_top: float
    rate_williams_any: float
    rate_ctp_pairwise: np.ndarray
    rate_ctp_pairwise_any: float
    rate_ctp_williams: np.ndarray
    rate_ctp_williams_any: float
    n_boundary: int
    n_degenerate: int
    elapsed: float = field(compare=False)

    def __post_init__(self):
        k = self.scenario.k
        for name, any_name in (
            ("rate_dunnett", "rate_dunnett_any"),
            ("rate_ctp_pairwise", "rate_ctp_pairwise_any"),
            ("rate_ctp_williams", "rate_ctp_williams_any"),
        ):
            per_dose = getattr(self, name)
            any_rate = getattr(self, any_name)
            if per_dose.shape != (k,):
                raise ValueError(f"{name} must have one entry per dose")
            if np.any(per_dose < 0.0) or np.any(per_dose > 1.0) or not 0.0 <= any_rate <= 1.0:
                raise ValueError(f"{name} rates must lie in [0, 1]")
            if np.any(per_dose > any_rate):
                raise ValueError(f"{any_name} cannot be below a per-dose rate")
        if not 0.0 <= self.rate_williams_top <= self.rate_williams_any <= 1.0:
            raise ValueError("williams any-pair rate cannot be below the top-row rate")
        if self.n_boundary < 0 or self.n_degenerate < 0:
            raise ValueError("replicate counters cannot be negative")
        if self.n_boundary + self.n_degenerate > self.scenario.replicates:
            raise ValueError("replicate counters exceed the replicate total")

    def to_dict(self) -> dict:
        """Plain-type rendering with full precision; excludes timing."""
        sc = self.scenario
        return {
            "name": sc.name,
            "pi": list(sc.pi),
            "n": list(sc.n),
            "replicates": sc.replicates,
            "alpha": sc.alpha,
            "seed": sc.seed,
            "boundary_policy": sc.boundary_policy,
            "mvn_tol": sc.mvn_tol,
            "rates": {
                "dunnett": {
                    "per_dose": [float(v) for v in self.rate_dunnett],
                    "any": float(self.rate_dunnett_any),
                },
                "williams": {
                    "top": float(self.rate_williams_top),
                    "any": float(self.rate_williams_any),
                },
                "ctp_pairwise": {
                    "per_dose": [float(v) for v in self.rate_ctp_pairwise],
                    "any": float(self.rate_ctp_pairwise_any),
                },
                "ctp_williams": {
                    "per_dose": [float(v) for v in self.rate_ctp_williams],
                    "any": float(self.rate_ctp_williams_any),
                },
            },
            "n_boundary": self.n_boundary,
            "n_degenerate": self.n_degenerate,
        }


def _decide_family_rows(t, R, alpha, seed_entropy, tol, want_row0):
    """(row-0 decision, any-row decision) for one maxT family.

    Rows are settled individually against alpha; evaluation stops once a
    rejection is found, which cannot change the any-row result.  Rows are
    visited in decreasing statistic order so likely rejections come first.
    """
    spec = MvnSpec(R)
    row0 = None
    if want_row0:
        row0 = adjusted_p_below(
            spec, float(t[0]), alpha,
            seed=np.random.SeedSequence(seed_entropy, spawn_key=(0,)), abs_tol=tol,
        )
        if row0:
            return True, True
        order = 1 + np.argsort(-t[1:], kind="stable")
    else:
        order = np.argsort(-t, kind="stable")
    for r in order:
        if adjusted_p_below(
            spec, float(t[r]), alpha,
            seed=np.random.SeedSequence(seed_entropy, spawn_key=(int(r),)), abs_tol=tol,
        ):
            return row0, True
    return row0, False


def _run_chunk(sc: Scenario, start: int, count: int) -> np.ndarray:
    """Integer decision counts over replicates [start, start+count).

    Layout: [D_1..D_k, D_any, W_top, W_any, P_1..P_k, P_any,
    C_1..C_k, C_any, n_boundary, n_degenerate].
    """
    k = sc.k
    n = np.asarray(sc.n, dtype=np.int64)
    pi = np.asarray(sc.pi, dtype=np.float64)
    alpha, tol = sc.alpha, sc.mvn_tol
    policy = sc.boundary_policy
    C_dun = dunnett_matrix(n).coefficients
    # segment j uses the Williams family on groups {0..j}, zero-padded
    C_seg = {
        j: pad_to_full(williams_matrix(n[: j + 1]), k + 1).coefficients
        for j in range(2, k + 1)
    }
    counts = np.zeros(3 * k + 7, dtype=np.int64)
    i_dany, i_wtop, i_wany = k, k + 1, k + 2
    i_p0, i_pany = k + 3, 2 * k + 3
    i_c0, i_cany = 2 * k + 4, 3 * k + 4
    i_bnd, i_deg = 3 * k + 5, 3 * k + 6

    for rep in range(start, start + count):
        rep_ss = np.random.SeedSequence(sc.seed, spawn_key=(rep,))
        draw_ss, mvn_ss = rep_ss.spawn(2)
        y = np.random.default_rng(draw_ss).binomial(n, pi)
        at_boundary = (y == 0) | (y == n)
        if np.all(y == 0) or np.all(y == n):
            counts[i_deg] += 1
            continue
        if at_boundary.any():
            counts[i_bnd] += 1
            if policy == "reject":
                # replicate cannot be analyzed, no claims
                continue
        if policy == "smooth":
            yc = y + 1.0
            nc = n + 2.0
        elif at_boundary.any():
            yc = np.where(at_boundary, y + 0.5, y.astype(np.float64))
            nc = np.where(at_boundary, n + 1.0, n.astype(np.float64))
        else:
            yc = y.astype(np.float64)
            nc = n.astype(np.float64)
        eta = np.log(yc / (nc - yc))
        var_eta = 1.0 / yc + 1.0 / (nc - yc)
        mvn_seeds = mvn_ss.generate_state(2 * k, dtype=np.uint64)

        _, _, t_d, R_d = contrast_moments(C_dun, eta, var_eta)
        p_raw = ndtr(-t_d)

        # Dunnett: one banded decision per dose, union for the any rate
        spec_d = MvnSpec(R_d)
        d_any = False
        for i in range(k):
            if adjusted_p_below(
                spec_d, float(t_d[i]), alpha, seed=int(mvn_seeds[i]), abs_tol=tol
            ):
                counts[i] += 1
                d_any = True
        if d_any:
            counts[i_dany] += 1

        # P variant: running maximum of raw p-values, no integration
        p_chain = np.maximum.accumulate(p_raw[::-1])[::-1]
        dec_p = p_chain < alpha
        counts[i_p0 : i_p0 + k] += dec_p
        if dec_p.any():
            counts[i_pany] += 1

        # Williams family doubles as the top segment S_k
        if k == 1:
            w_top = w_any = s_top = bool(p_raw[0] < alpha)
        else:
            _, _, t_w, R_w = contrast_moments(C_seg[k], eta, var_eta)
            w_top, w_any = _decide_family_rows(
                t_w, R_w, alpha, int(mvn_seeds[2 * k - 1]), tol, want_row0=True
            )
            s_top = w_any
        if w_top:
            counts[i_wtop] += 1
        if w_any:
            counts[i_wany] += 1

        # C variant: walk the segment chain downward while it rejects
        j_star = None
        if s_top:
            j_star = k
            for j in range(k - 1, 0, -1):
                if j == 1:
                    ok = bool(p_raw[0] < alpha)
                else:
                    _, _, t_s, R_s = contrast_moments(C_seg[j], eta, var_eta)
                    _, ok = _decide_family_rows(
                        t_s, R_s, alpha, int(mvn_seeds[k + j - 1]), tol, want_row0=False
                    )
                if not ok:
                    break
                j_star = j
        if j_star is not None:
            counts[i_c0 + j_star - 1 : i_c0 + k] += 1
            counts[i_cany] += 1
    return counts


def _chunk_worker(args) -> np.ndarray:
    return _run_chunk(*args)


def run_scenario(sc: Scenario, parallelism: int = 1) -> ScenarioResult:
    """Estimate all rates for one scenario.

    ``parallelism`` sets the worker process count; the result is
    bit-identical for every value because replicate seeds depend only on
    the replicate index and integer counts commute under addition.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    t0 = time.perf_counter()
    k = sc.k
    tasks = [
        (sc, start, min(_CHUNK, sc.replicates - start))
        for start in range(0, sc.replicates, _CHUNK)
    ]
    counts = np.zeros(3 * k + 7, dtype=np.int64)
    if parallelism == 1 or len(tasks) == 1:
        for task in tasks:
            counts += _run_chunk(*task)
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            for vec in pool.map(_chunk_worker, tasks):
                counts += vec
    reps = float(sc.replicates)
    rate = counts / reps
    return ScenarioResult(
        scenario=sc,
        rate_dunnett=rate[:k],
        rate_dunnett_any=float(rate[k]),
        rate_williams_top=float(rate[k + 1]),
        rate_williams_any=float(rate[k + 2]),
        rate_ctp_pairwise=rate[k + 3 : 2 * k + 3],
        rate_ctp_pairwise_any=float(rate[2 * k + 3]),
        rate_ctp_williams=rate[2 * k + 4 : 3 * k + 4],
        rate_ctp_williams_any=float(rate[3 * k + 4]),
        n_boundary=int(counts[3 * k + 5]),
        n_degenerate=int(counts[3 * k + 6]),
        elapsed=time.perf_counter() - t0,
    )


def run_study(scenarios, parallelism: int = 1):
    """Run scenarios in order and return their results in the same order."""
    scenarios = list(scenarios)
    for sc in scenarios:
        if not isinstance(sc, Scenario):
            raise TypeError(f"expected Scenario, got {type(sc).__name__}")
    return [run_scenario(sc, parallelism) for sc in scenarios]


def _cfg_get(mapping, key, where, required=False, default=None):
    if key in mapping:
        return mapping[key]
    if required:
        raise StudyConfigError(f"{where}.{key}: required field is missing")
    return default


def _check_keys(mapping, allowed, where):
    for key in mapping:
        if key not in allowed:
            raise StudyConfigError(f"{where}.{key}: unknown field")


def load_study(path) -> list:
    """Parse a study configuration file into a list of scenarios.

    The file is a YAML (or JSON) mapping with ``schema_version: 1``, a
    ``master_seed``, optional ``defaults`` shared by all scenarios, and a
    ``scenarios`` list.  A scenario without an explicit ``seed`` gets one
    derived from the master seed and its position, so adding or
    reordering other scenarios never changes its stream.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise StudyConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise StudyConfigError(f"config {path} is not valid YAML/JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise StudyConfigError("config root must be a mapping")
    _check_keys(raw, {"schema_version", "master_seed", "defaults", "scenarios"}, "config")
    version = _cfg_get(raw, "schema_version", "config", required=True)
    if version != SCHEMA_VERSION:
        raise StudyConfigError(
            f"config.schema_version: expected {SCHEMA_VERSION}, got {version!r}"
        )
    master_seed = _cfg_get(raw, "master_seed", "config", required=True)
    if not isinstance(master_seed, int) or master_seed < 0:
        raise StudyConfigError("config.master_seed: must be a nonnegative integer")
    defaults = _cfg_get(raw, "defaults", "config", default={})
    if not isinstance(defaults, dict):
        raise StudyConfigError("config.defaults: must be a mapping")
    _check_keys(
        defaults,
        {"n", "replicates", "alpha", "boundary_policy", "mvn_tol"},
        "config.defaults",
    )
    entries = _cfg_get(raw, "scenarios", "config", required=True)
    if not isinstance(entries, list) or not entries:
        raise StudyConfigError("config.scenarios: must be a non-empty list")

    scenarios = []
    for i, entry in enumerate(entries):
        where = f"scenarios[{i}]"
        if not isinstance(entry, dict):
            raise StudyConfigError(f"{where}: must be a mapping")
        _check_keys(
            entry,
            {"name", "pi", "n", "replicates", "alpha", "boundary_policy", "mvn_tol", "seed"},
            where,
        )
        merged = dict(defaults)
        merged.update(entry)
        pi = _cfg_get(merged, "pi", where, required=True)
        n = _cfg_get(merged, "n", where, required=True)
        if "seed" in entry:
            seed = entry["seed"]
            if not isinstance(seed, int) or seed < 0:
                raise StudyConfigError(f"{where}.seed: must be a nonnegative integer")
        else:
            seed = int(
                np.random.SeedSequence(master_seed, spawn_key=(i,)).generate_state(
                    1, dtype=np.uint64
                )[0]
            )
        try:
            scenarios.append(
                Scenario(
                    pi=tuple(pi) if isinstance(pi, (list, tuple)) else pi,
                    n=tuple(n) if isinstance(n, (list, tuple)) else n,
                    replicates=merged.get("replicates", DEFAULT_REPLICATES),
                    alpha=merged.get("alpha", 0.05),
                    seed=seed,
                    boundary_policy=merged.get("boundary_policy", "smooth"),
                    mvn_tol=merged.get("mvn_tol", DEFAULT_MVN_TOL),
                    name=str(merged.get("name") or f"scenario-{i}"),
                )
            )
        except (TypeError, ValueError) as exc:
            raise StudyConfigError(f"{where}: {exc}") from exc
    return scenarios
