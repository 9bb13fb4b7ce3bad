"""Direct power evaluation on exemplary datasets.

The analytic route: build the dataset whose outcome is the modeled mean,
fit it by generalized least squares under the true covariance, and read
the noncentrality of the contrast of interest straight off the fit.  The
power is then a noncentral F tail with a denominator degrees of freedom
chosen by a named policy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import correlation, designs, distributions
from .correlation import CorrelationParams, VarianceComponents
from .designs import DesignSpec
from .distributions import PowerResult

__all__ = [
    "DDF_POLICIES",
    "GlsEstimate",
    "PowerAudit",
    "default_ddf_policy",
    "study_blocks",
    "gls_estimate",
    "wald_f",
    "resolve_ddf",
    "analytic_power",
    "power_audit",
]

DDF_POLICIES = ("residual", "containment", "between_within")

# relative tolerance for the exemplary-mean reproduction check
_FIT_RTOL = 1e-8


@dataclass(frozen=True)
class GlsEstimate:
    """Generalized least squares fit under a known covariance.

    Attributes:
        beta: coefficient estimates.
        cov: their covariance, the inverse of the information matrix.
        information: X' V^{-1} X accumulated over clusters.
    """

    beta: np.ndarray
    cov: np.ndarray
    information: np.ndarray


@dataclass(frozen=True)
class PowerAudit:
    """Everything that went into one analytic power figure."""

    result: PowerResult
    kind: str
    n_observations: int
    n_clusters: int
    n_times: int
    contrast: str
    beta: tuple[float, ...]
    components: VarianceComponents
    ddf_policy: str


def default_ddf_policy(kind: designs.DesignKind) -> str:
    """Policy used when the caller does not pick one.

    Individually randomized kinds use the residual rule; post-only
    cluster designs the containment rule; repeated-measures cluster
    designs the between-within rule.
    """
    if kind in designs.RCT_KINDS:
        return "residual"
    if kind == designs.DesignKind.CRT_POST:
        return "containment"
    return "between_within"


def _require_clustered(spec: DesignSpec, policy: str) -> None:
    if spec.kind in designs.RCT_KINDS:
        raise ValueError(
            f"ddf policy {policy!r} needs a clustered design; use 'residual' "
            f"for {spec.kind.value}"
        )


def _validate_params_for_kind(spec: DesignSpec, params: CorrelationParams) -> None:
    if spec.kind in designs.RCT_KINDS and params.icc != 0.0:
        raise ValueError(
            "individually randomized kinds model independent subjects; "
            f"icc must be 0, got {params.icc!r}"
        )


def study_blocks(
    spec: DesignSpec, comps: VarianceComponents
) -> list[np.ndarray]:
    """Per-cluster covariance matrices, in dataset row order."""
    structure = designs.cluster_structure(spec)
    by_size: dict[int, np.ndarray] = {}
    blocks = []
    for cb in structure:
        if cb.n_subjects not in by_size:
            by_size[cb.n_subjects] = correlation.build_cluster_v(
                spec, comps, cluster_index=cb.index
            ).matrix
        blocks.append(by_size[cb.n_subjects])
    return blocks


def gls_estimate(
    x: np.ndarray, v_blocks: Sequence[np.ndarray], y: np.ndarray
) -> GlsEstimate:
    """Fit y = x beta + error with block-diagonal error covariance.

    The blocks partition the rows in order; each cluster contributes
    X_c' V_c^{-1} X_c and X_c' V_c^{-1} y_c through a linear solve, so
    the study covariance is never formed or inverted as a whole.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = x.shape
    if y.shape != (n,):
        raise ValueError(f"y has shape {y.shape}, expected ({n},)")
    total = sum(b.shape[0] for b in v_blocks)
    if total != n:
        raise ValueError(f"covariance blocks cover {total} rows, design has {n}")

    information = np.zeros((p, p))
    score = np.zeros(p)
    at = 0
    for block in v_blocks:
        k = block.shape[0]
        rows = slice(at, at + k)
        at += k
        rhs = np.concatenate([x[rows], y[rows, None]], axis=1)
        try:
            solved = np.linalg.solve(block, rhs)
        except np.linalg.LinAlgError as exc:
            raise ValueError(
                "cluster covariance is singular; the correlation parameters "
                "leave no measurement-level variation"
            ) from exc
        information += x[rows].T @ solved[:, :p]
        score += x[rows].T @ solved[:, p]

    try:
        beta = np.linalg.solve(information, score)
        cov = np.linalg.solve(information, np.eye(p))
    except np.linalg.LinAlgError as exc:
        raise ValueError("information matrix is singular") from exc
    return GlsEstimate(beta=beta, cov=cov, information=information)


def wald_f(
    beta: np.ndarray, cov: np.ndarray, contrast: np.ndarray
) -> tuple[float, int]:
    """F statistic of a linear hypothesis about fitted coefficients.

    Returns the statistic and its numerator degrees of freedom (the
    number of contrast rows).
    """
    contrast = np.atleast_2d(np.asarray(contrast, dtype=float))
    q = contrast.shape[0]
    estimate = contrast @ beta
    middle = contrast @ cov @ contrast.T
    try:
        solved = np.linalg.solve(middle, estimate)
    except np.linalg.LinAlgError as exc:
        raise ValueError("contrast covariance is singular") from exc
    fvalue = float(estimate @ solved) / q
    return fvalue, q


def resolve_ddf(spec: DesignSpec, policy: str) -> int:
    """Denominator degrees of freedom under a named policy.

    residual: observations minus the design matrix rank.
    containment: observations minus the number of clusters.
    between_within: the residual degrees of freedom are split into a
        between-cluster stratum (clusters minus the rank of the
        cluster-constant columns) and a within-cluster remainder; the
        tested effect takes the between stratum when it involves a
        cluster-constant factor and the within stratum otherwise.
    """
    if policy not in DDF_POLICIES:
        raise ValueError(f"unknown ddf policy {policy!r}; choose from {DDF_POLICIES}")
    dataset = designs.exemplary_dataset(spec)
    x = designs.design_matrix(spec, dataset)
    n = x.shape[0]
    rank_x = int(np.linalg.matrix_rank(x))

    if policy == "residual":
        ddf = n - rank_x
    elif policy == "containment":
        _require_clustered(spec, policy)
        ddf = n - spec.n_clusters
    else:
        _require_clustered(spec, policy)
        columns = designs.design_columns(spec)
        structure = designs.cluster_structure(spec)
        const_idx = [j for j, c in enumerate(columns) if c.cluster_constant]
        cluster_level = np.array([x[cb.row_start, const_idx] for cb in structure])
        between = spec.n_clusters - int(np.linalg.matrix_rank(cluster_level))
        within = (n - rank_x) - between
        contrast = designs.hypothesis_contrast(spec)
        selected = np.flatnonzero(contrast.matrix[0])
        uses_between = any(columns[j].involves_cluster_constant for j in selected)
        ddf = between if uses_between else within

    if ddf < 1:
        raise ValueError(
            f"ddf policy {policy!r} leaves {ddf} denominator degrees of freedom "
            "for this design"
        )
    return int(ddf)


def _fit_exemplary(
    spec: DesignSpec, params: CorrelationParams
) -> tuple[GlsEstimate, float, int, VarianceComponents, designs.Contrast]:
    _validate_params_for_kind(spec, params)
    family = correlation.family_for_kind(spec.kind)
    comps = correlation.derive_components(params, family)
    dataset = designs.exemplary_dataset(spec)
    x = designs.design_matrix(spec, dataset)
    y = dataset.mean
    blocks = study_blocks(spec, comps)
    fit = gls_estimate(x, blocks, y)

    # the modeled means must be exactly representable by the fixed effects
    scale = max(1.0, float(np.linalg.norm(y)))
    misfit = float(np.linalg.norm(x @ fit.beta - y))
    if misfit > _FIT_RTOL * scale:
        raise ValueError(
            "exemplary means are not reproduced by the fixed effects "
            f"(residual norm {misfit:.3e}); the cell means are inconsistent "
            "with the design model"
        )

    contrast = designs.hypothesis_contrast(spec)
    fvalue, ndf = wald_f(fit.beta, fit.cov, contrast.matrix)
    return fit, fvalue, ndf, comps, contrast


def analytic_power(
    spec: DesignSpec,
    params: CorrelationParams,
    *,
    ddf_policy: str | None = None,
    alpha: float | None = None,
) -> PowerResult:
    """Power of the design's primary hypothesis test by direct evaluation.

    Fits the exemplary dataset by GLS under the covariance implied by
    params, turns the contrast into a noncentrality, resolves the
    denominator degrees of freedom by policy, and evaluates the
    noncentral F tail.

    Args:
        spec: design description.
        params: marginal correlation description.
        ddf_policy: one of DDF_POLICIES; defaults per design kind.
        alpha: type I error rate; defaults to spec.alpha.

    Returns:
        PowerResult; its ddf_policy field records the policy used.
    """
    policy = ddf_policy or default_ddf_policy(spec.kind)
    _, fvalue, ndf, _, _ = _fit_exemplary(spec, params)
    ddf = resolve_ddf(spec, policy)
    return distributions.power_from_f(
        fvalue, ndf, ddf, spec.alpha if alpha is None else alpha, ddf_policy=policy
    )


def power_audit(
    spec: DesignSpec,
    params: CorrelationParams,
    *,
    ddf_policy: str | None = None,
    alpha: float | None = None,
) -> PowerAudit:
    """analytic_power plus the intermediate quantities that produced it."""
    policy = ddf_policy or default_ddf_policy(spec.kind)
    fit, fvalue, ndf, comps, contrast = _fit_exemplary(spec, params)
    ddf = resolve_ddf(spec, policy)
    result = distributions.power_from_f(
        fvalue, ndf, ddf, spec.alpha if alpha is None else alpha, ddf_policy=policy
    )
    return PowerAudit(
        result=result,
        kind=spec.kind.value,
        n_observations=spec.n_observations,
        n_clusters=spec.n_clusters,
        n_times=spec.n_times,
        contrast=contrast.name,
        beta=tuple(float(b) for b in fit.beta),
        components=comps,
        ddf_policy=policy,
    )
