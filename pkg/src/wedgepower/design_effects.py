"""Closed-form design effects and sample size inflation.

A design effect is the multiplier that converts the sample size of an
individually randomized post-only trial into the size a clustered or
repeated-measures design needs for the same power.  This module carries
the standard multipliers for parallel cluster designs, baseline-adjusted
pre-post cluster designs, cross-sectional stepped wedge designs, and
three-measurement cohort designs, plus helpers to turn a multiplier into
a sample size plan or to deflate a naive test statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "DesignEffectResult",
    "SamplePlan",
    "EqualClusterPlan",
    "de_simple",
    "cluster_mean_correlation",
    "de_ancova_prepost",
    "de_stepped_wedge",
    "de_three_measurement",
    "inflate_sample_size",
    "equal_cluster_plan",
    "adjust_statistic",
    "design_effect_for",
]


@dataclass(frozen=True)
class DesignEffectResult:
    """A design effect with its multiplicative decomposition.

    Attributes:
        value: the design effect itself.
        factors: named multiplicative pieces; their product equals value.
        baseline_r: correlation between baseline and follow-up summaries
            used by baseline-adjusted formulas, when one is involved.
        formula: identifier of the formula that produced the value.
    """

    value: float
    factors: dict[str, float]
    baseline_r: float | None
    formula: str


@dataclass(frozen=True)
class SamplePlan:
    """Sample size plan produced by inflating an unclustered total.

    observations_raw holds the exact inflated measurement count and
    participants_raw the matching participant count; the integer fields
    round them up to whole units.
    """

    n_unclustered: int
    design_effect: float
    observations_raw: float
    observations: int
    participants_raw: float
    participants: int


@dataclass(frozen=True)
class EqualClusterPlan:
    """Equal-cluster arrangement meeting or exceeding a participant target."""

    clusters: int
    clusters_per_arm: tuple[int, int]
    cluster_size: int
    n_total: int


def _check_cluster_size(n: int) -> int:
    if isinstance(n, bool) or not float(n).is_integer() or n < 1:
        raise ValueError(f"cluster size must be a positive integer, got {n!r}")
    return int(n)


def _check_icc(icc: float) -> float:
    if not (0.0 <= icc < 1.0):
        raise ValueError(f"icc must lie in [0, 1), got {icc!r}")
    return float(icc)


def _check_share(name: str, value: float) -> float:
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)


def de_simple(cluster_size: int, icc: float) -> DesignEffectResult:
    """Variance inflation of a post-only parallel cluster design.

    1 + (cluster_size - 1) * icc: the factor by which clustering inflates
    the variance of a difference of means relative to an individually
    randomized trial with the same total size.
    """
    n = _check_cluster_size(cluster_size)
    rho = _check_icc(icc)
    value = 1.0 + (n - 1) * rho
    return DesignEffectResult(
        value=value,
        factors={"clustering": value},
        baseline_r=None,
        formula="simple",
    )


def cluster_mean_correlation(
    cluster_size: int, icc: float, cac: float, sac: float
) -> float:
    """Correlation between baseline and follow-up cluster summaries.

    Weighs the cluster autocorrelation by the cluster-level share of the
    summary's variance and the subject autocorrelation by the
    subject-level share:

        r = (n * icc * cac + (1 - icc) * sac) / (1 + (n - 1) * icc)

    For cross-sectional designs pass sac = 0; the subject share then
    drops out because follow-up subjects are new draws.
    """
    n = _check_cluster_size(cluster_size)
    rho = _check_icc(icc)
    rho_c = _check_share("cac", cac)
    rho_s = _check_share("sac", sac)
    vif = 1.0 + (n - 1) * rho
    r = (n * rho * rho_c + (1.0 - rho) * rho_s) / vif
    # r is a weighted mean of cac and sac; rounding must not escape it
    return min(max(r, min(rho_c, rho_s)), max(rho_c, rho_s))


def de_ancova_prepost(
    cluster_size: int, icc: float, cac: float, sac: float = 0.0
) -> DesignEffectResult:
    """Design effect of a baseline-adjusted two-period cluster design.

    The clustering factor 1 + (n - 1) * icc is discounted by 1 - r**2,
    the variance reduction from regressing follow-up summaries on
    baseline summaries with correlation r.
    """
    n = _check_cluster_size(cluster_size)
    rho = _check_icc(icc)
    r = cluster_mean_correlation(n, rho, cac, sac)
    clustering = 1.0 + (n - 1) * rho
    adjustment = 1.0 - r * r
    return DesignEffectResult(
        value=clustering * adjustment,
        factors={"clustering": clustering, "baseline_adjustment": adjustment},
        baseline_r=r,
        formula="ancova_prepost",
    )


def de_stepped_wedge(
    steps_k: int, baseline_b: int, per_step_t: int, cluster_size: int, icc: float
) -> DesignEffectResult:
    """Design effect of a cross-sectional stepped wedge design.

    Relative to a post-only individually randomized trial, the design
    pays a clustering penalty on all k*t*n + b*n measurements per
    cluster and earns back efficiency from within-cluster crossover:

        [1 + icc*(k*t*n + b*n - 1)] / [1 + icc*(k*t*n/2 + b*n - 1)]
            * 3*(1 - icc) / [2*t*(k - 1/k)]

    The resulting multiplier applies to measurement counts; see
    inflate_sample_size for the participant conversion.
    """
    for name, value in (
        ("steps_k", steps_k),
        ("baseline_b", baseline_b),
        ("per_step_t", per_step_t),
    ):
        if isinstance(value, bool) or not float(value).is_integer() or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value!r}")
    if steps_k < 2:
        raise ValueError(
            "stepped wedge design effect needs at least 2 steps; a single "
            "step leaves exposure confounded with time"
        )
    n = _check_cluster_size(cluster_size)
    rho = _check_icc(icc)
    k, b, t = int(steps_k), int(baseline_b), int(per_step_t)

    ktn = k * t * n
    bn = b * n
    cluster_adjustment = (1.0 + rho * (ktn + bn - 1)) / (
        1.0 + rho * (0.5 * ktn + bn - 1)
    )
    efficiency = 3.0 * (1.0 - rho) / (2.0 * t * (k - 1.0 / k))
    return DesignEffectResult(
        value=cluster_adjustment * efficiency,
        factors={
            "cluster_adjustment": cluster_adjustment,
            "crossover_efficiency": efficiency,
        },
        baseline_r=None,
        formula="stepped_wedge",
    )


def de_three_measurement(
    cluster_size: int, icc: float, cac: float, sac: float
) -> DesignEffectResult:
    """Design effect of a three-measurement cohort design.

    One baseline and two follow-up summaries per cluster, analyzed with
    baseline adjustment; the two follow-ups share correlation r with the
    baseline and with each other, giving

        [1 + (n - 1) * icc] * [1 - 2*r**2 / (1 + r)]

    With cac = 1 and sac = 0 this coincides with the two-step,
    one-baseline stepped wedge multiplier for the same cluster size.
    Like the stepped wedge multiplier it applies to measurement counts.
    """
    n = _check_cluster_size(cluster_size)
    rho = _check_icc(icc)
    r = cluster_mean_correlation(n, rho, cac, sac)
    clustering = 1.0 + (n - 1) * rho
    adjustment = 1.0 - 2.0 * r * r / (1.0 + r)
    return DesignEffectResult(
        value=clustering * adjustment,
        factors={"clustering": clustering, "repeated_adjustment": adjustment},
        baseline_r=r,
        formula="three_measurement",
    )


def inflate_sample_size(
    n_unclustered: int,
    design_effect: float,
    *,
    observation_multiplier: float = 1.0,
    measurements_per_participant: int = 1,
) -> SamplePlan:
    """Convert an unclustered total into a clustered sample size plan.

    Args:
        n_unclustered: total size of the reference individually
            randomized trial.
        design_effect: multiplier from one of the de_* functions.
        observation_multiplier: extra factor applied when the multiplier
            is expressed per comparison rather than per measurement (the
            stepped wedge formulas need the measurements-per-cluster-
            period count, i.e. the number of times).
        measurements_per_participant: how many of the resulting
            measurements each participant contributes; cohort designs
            divide the measurement total by this to count people.

    Returns:
        SamplePlan with raw and rounded-up observation and participant
        totals.
    """
    if isinstance(n_unclustered, bool) or not float(n_unclustered).is_integer():
        raise ValueError(f"n_unclustered must be an integer, got {n_unclustered!r}")
    if n_unclustered < 1:
        raise ValueError(f"n_unclustered must be >= 1, got {n_unclustered!r}")
    if not (math.isfinite(design_effect) and design_effect > 0):
        raise ValueError(f"design_effect must be positive, got {design_effect!r}")
    if measurements_per_participant < 1:
        raise ValueError(
            "measurements_per_participant must be >= 1, "
            f"got {measurements_per_participant!r}"
        )

    observations_raw = float(n_unclustered) * design_effect * observation_multiplier
    participants_raw = observations_raw / measurements_per_participant
    # tolerate float fuzz just below an integer before rounding up
    observations = math.ceil(observations_raw - 1e-9)
    participants = math.ceil(participants_raw - 1e-9)
    return SamplePlan(
        n_unclustered=int(n_unclustered),
        design_effect=design_effect,
        observations_raw=observations_raw,
        observations=observations,
        participants_raw=participants_raw,
        participants=participants,
    )


def equal_cluster_plan(
    target_participants: float, cluster_size: int, arms: int = 2
) -> EqualClusterPlan:
    """Smallest equal-size cluster arrangement reaching a participant target.

    Splits the clusters across arms as evenly as possible, extra cluster
    to the first arm.
    """
    n = _check_cluster_size(cluster_size)
    if not (math.isfinite(target_participants) and target_participants > 0):
        raise ValueError(
            f"target_participants must be positive, got {target_participants!r}"
        )
    if arms != 2:
        raise ValueError(f"only two-arm plans are supported, got arms={arms!r}")
    clusters = math.ceil(target_participants / n - 1e-9)
    first = (clusters + 1) // 2
    return EqualClusterPlan(
        clusters=clusters,
        clusters_per_arm=(first, clusters - first),
        cluster_size=n,
        n_total=clusters * n,
    )


def adjust_statistic(statistic: float, design_effect: float, statistic_kind: str) -> float:
    """Deflate a test statistic computed as if observations were independent.

    Chi-square style statistics scale with variance, so they divide by
    the design effect; t style statistics divide by its square root.
    """
    if not math.isfinite(statistic):
        raise ValueError(f"statistic must be finite, got {statistic!r}")
    if not (math.isfinite(design_effect) and design_effect > 0):
        raise ValueError(f"design_effect must be positive, got {design_effect!r}")
    if statistic_kind == "chi2":
        return statistic / design_effect
    if statistic_kind == "t":
        return statistic / math.sqrt(design_effect)
    raise ValueError(
        f"statistic_kind must be 'chi2' or 't', got {statistic_kind!r}"
    )


def design_effect_for(spec, params) -> DesignEffectResult:
    """Closed-form design effect matching a design description.

    Individually randomized kinds have no inflation.  Parallel cluster
    kinds map to the simple or baseline-adjusted formula, cross-sectional
    stepped wedges to the stepped wedge formula, and cohort stepped
    wedges with exactly three measurement times to the three-measurement
    formula; other cohort wedge layouts have no closed form here.
    """
    from .designs import DesignKind

    kind = spec.kind
    sizes = set(spec.cluster_subject_counts())
    if kind in (DesignKind.RCT_POST, DesignKind.RCT_PREPOST):
        return DesignEffectResult(
            value=1.0, factors={}, baseline_r=None, formula="unclustered"
        )
    if len(sizes) != 1:
        raise ValueError(
            "closed-form design effects need a common cluster size; "
            f"got sizes {sorted(sizes)}"
        )
    n = sizes.pop()
    if kind == DesignKind.CRT_POST:
        return de_simple(n, params.icc)
    if kind == DesignKind.CRT_PREPOST_XSEC:
        return de_ancova_prepost(n, params.icc, params.cac, 0.0)
    if kind == DesignKind.CRT_PREPOST_COHORT:
        return de_ancova_prepost(n, params.icc, params.cac, params.sac)
    if kind == DesignKind.SWD_XSEC:
        return de_stepped_wedge(
            spec.steps_k, spec.baseline_b, spec.per_step_t, n, params.icc
        )
    if kind == DesignKind.SWD_COHORT:
        if spec.n_times != 3:
            raise ValueError(
                "the cohort wedge closed form covers exactly 3 measurement "
                f"times, this design has {spec.n_times}"
            )
        return de_three_measurement(n, params.icc, params.cac, params.sac)
    raise ValueError(f"unknown design kind {kind!r}")
