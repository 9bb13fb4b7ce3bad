"""Correlation structure of clustered and longitudinal outcomes.

Maps a marginal description of the outcome (total variance, intracluster
correlation, cluster autocorrelation, subject autocorrelation) to random
effect variance components, and builds the block compound symmetric
covariance matrix of one cluster or of a whole study.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .designs import DesignSpec

__all__ = [
    "Family",
    "CorrelationParams",
    "VarianceComponents",
    "BlockCovariance",
    "family_for_kind",
    "derive_components",
    "build_cluster_v",
    "vcorr",
    "assemble_study_v",
    "MAX_MATRIX_ROWS",
]

# guard against accidentally huge dense covariance matrices
MAX_MATRIX_ROWS = 10_000


class Family(str, enum.Enum):
    """Measurement structure of a cluster.

    SINGLE: one measurement occasion, one row per subject.
    CROSS_SECTIONAL: several occasions, fresh subjects at each one.
    COHORT: several occasions, the same subjects at each one.
    """

    SINGLE = "single"
    CROSS_SECTIONAL = "cross_sectional"
    COHORT = "cohort"


_FAMILY_BY_KIND = {
    "rct_post": Family.SINGLE,
    "crt_post": Family.SINGLE,
    "rct_prepost": Family.CROSS_SECTIONAL,
    "crt_prepost_xsec": Family.CROSS_SECTIONAL,
    "crt_prepost_cohort": Family.COHORT,
    "swd_xsec": Family.CROSS_SECTIONAL,
    "swd_cohort": Family.COHORT,
}


def family_for_kind(kind) -> Family:
    """Measurement family implied by a design kind."""
    key = getattr(kind, "value", kind)
    try:
        return _FAMILY_BY_KIND[key]
    except KeyError:
        raise ValueError(f"unknown design kind {key!r}") from None


@dataclass(frozen=True)
class CorrelationParams:
    """Marginal correlation description of the outcome.

    Attributes:
        sigma_y_sq: total variance of a single measurement.
        icc: intracluster correlation, the share of variance attributable
            to clusters; in [0, 1).
        cac: cluster autocorrelation, the share of the cluster-level
            variance that persists across measurement times; in [0, 1].
        sac: subject autocorrelation, the share of the subject-level
            variance that persists across measurement times; in [0, 1].
    """

    sigma_y_sq: float
    icc: float
    cac: float = 0.0
    sac: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma_y_sq) and self.sigma_y_sq > 0):
            raise ValueError(f"sigma_y_sq must be positive, got {self.sigma_y_sq!r}")
        if not (0.0 <= self.icc < 1.0):
            raise ValueError(f"icc must lie in [0, 1), got {self.icc!r}")
        if not (0.0 <= self.cac <= 1.0):
            raise ValueError(f"cac must lie in [0, 1], got {self.cac!r}")
        if not (0.0 <= self.sac <= 1.0):
            raise ValueError(f"sac must lie in [0, 1], got {self.sac!r}")


@dataclass(frozen=True)
class VarianceComponents:
    """Random effect variances that generate the outcome covariance.

    cluster: variance shared by all measurements in a cluster.
    cluster_by_time: variance shared within a cluster at one time only.
    subject: variance shared by all measurements on a subject.
    subject_by_time: variance unique to one measurement on a subject
        (plays the residual role in cohort structures).
    residual: measurement-level variance for structures where no subject
        is measured twice.
    """

    cluster: float
    cluster_by_time: float
    subject: float
    subject_by_time: float
    residual: float

    @property
    def total(self) -> float:
        return (
            self.cluster
            + self.cluster_by_time
            + self.subject
            + self.subject_by_time
            + self.residual
        )


def derive_components(params: CorrelationParams, family: Family) -> VarianceComponents:
    """Split the marginal variance into random effect components.

    The cluster share icc * sigma_y_sq splits into a persistent part
    (weight cac) and a time-specific part; for cohort structures the
    subject share (1 - icc) * sigma_y_sq splits the same way with
    weight sac.

    Args:
        params: marginal correlation description.
        family: measurement structure the components must generate.

    Returns:
        VarianceComponents summing to sigma_y_sq.
    """
    s2 = params.sigma_y_sq
    cluster_share = params.icc * s2
    subject_share = (1.0 - params.icc) * s2

    if family is Family.SINGLE:
        # one occasion: persistent and time-specific cluster variance are
        # indistinguishable, so the whole share is reported as cluster
        if params.sac != 0.0:
            raise ValueError(
                "sac must be 0 for single-measurement structures "
                f"(got sac={params.sac!r})"
            )
        return VarianceComponents(
            cluster=cluster_share,
            cluster_by_time=0.0,
            subject=0.0,
            subject_by_time=0.0,
            residual=subject_share,
        )

    if family is Family.CROSS_SECTIONAL:
        if params.sac != 0.0:
            raise ValueError(
                "sac must be 0 when no subject is measured twice "
                f"(got sac={params.sac!r})"
            )
        return VarianceComponents(
            cluster=params.cac * cluster_share,
            cluster_by_time=(1.0 - params.cac) * cluster_share,
            subject=0.0,
            subject_by_time=0.0,
            residual=subject_share,
        )

    if family is Family.COHORT:
        return VarianceComponents(
            cluster=params.cac * cluster_share,
            cluster_by_time=(1.0 - params.cac) * cluster_share,
            subject=params.sac * subject_share,
            subject_by_time=(1.0 - params.sac) * subject_share,
            residual=0.0,
        )

    raise ValueError(f"unknown family {family!r}")


@dataclass(frozen=True)
class BlockCovariance:
    """Covariance matrix of one cluster, with its generating structure.

    Attributes:
        matrix: dense covariance of the cluster's measurements.
        family: measurement structure the matrix encodes.
        layout: row ordering, "subject_major" (all times of subject 1,
            then subject 2, ...), "time_major" (all subjects at time 1,
            then time 2, ...), or "single" (one time).
        n_subjects: subjects per occasion (cross-sectional) or per
            cluster (single and cohort).
        n_times: measurement occasions.
        components: variance components the matrix was built from.
    """

    matrix: np.ndarray
    family: Family
    layout: str
    n_subjects: int
    n_times: int
    components: VarianceComponents


def _layout_for_family(family: Family) -> str:
    if family is Family.SINGLE:
        return "single"
    if family is Family.CROSS_SECTIONAL:
        return "time_major"
    return "subject_major"


def _cluster_matrix(
    comps: VarianceComponents, family: Family, n_subjects: int, n_times: int
) -> np.ndarray:
    """Dense covariance of one cluster's measurement vector."""
    if n_subjects < 1 or n_times < 1:
        raise ValueError(
            f"cluster dimensions must be >= 1, got n_subjects={n_subjects}, "
            f"n_times={n_times}"
        )
    if family is Family.SINGLE and n_times != 1:
        raise ValueError("single-measurement structures have exactly one time")

    if family is Family.SINGLE:
        size = n_subjects
        subject = np.arange(n_subjects)
        time = np.zeros(n_subjects, dtype=int)
    elif family is Family.CROSS_SECTIONAL:
        size = n_subjects * n_times
        # fresh subjects at every time: globally distinct subject labels
        subject = np.arange(size)
        time = np.repeat(np.arange(n_times), n_subjects)
    else:
        size = n_subjects * n_times
        subject = np.repeat(np.arange(n_subjects), n_times)
        time = np.tile(np.arange(n_times), n_subjects)

    if size > MAX_MATRIX_ROWS:
        raise ValueError(
            f"cluster covariance would have {size} rows; limit is {MAX_MATRIX_ROWS}"
        )

    same_subject = subject[:, None] == subject[None, :]
    same_time = time[:, None] == time[None, :]
    matrix = np.where(
        same_subject & same_time,
        comps.total,
        np.where(
            same_subject,
            comps.cluster + comps.subject,
            np.where(same_time, comps.cluster + comps.cluster_by_time, comps.cluster),
        ),
    )
    return matrix.astype(float)


# kinds whose randomized unit is a single observation
_SINGLETON_KINDS = frozenset({"rct_post", "rct_prepost"})


def build_cluster_v(
    spec: "DesignSpec", comps: VarianceComponents, cluster_index: int = 0
) -> BlockCovariance:
    """Covariance matrix of one cluster of a design.

    Args:
        spec: design whose measurement schedule fixes the matrix layout.
        comps: variance components from derive_components.
        cluster_index: which cluster, 0-based; sizes can differ when the
            design carries a per-cluster size list.

    Returns:
        BlockCovariance for that cluster.
    """
    family = family_for_kind(spec.kind)
    if getattr(spec.kind, "value", spec.kind) in _SINGLETON_KINDS:
        # individually randomized: every block is one observation
        family = Family.SINGLE
    sizes = spec.cluster_subject_counts()
    if not (0 <= cluster_index < len(sizes)):
        raise ValueError(
            f"cluster_index must lie in [0, {len(sizes) - 1}], got {cluster_index}"
        )
    n_subjects = sizes[cluster_index]
    n_times = 1 if family is Family.SINGLE else spec.n_times
    matrix = _cluster_matrix(comps, family, n_subjects, n_times)
    return BlockCovariance(
        matrix=matrix,
        family=family,
        layout=_layout_for_family(family),
        n_subjects=n_subjects,
        n_times=n_times,
        components=comps,
    )


def vcorr(v: "BlockCovariance | np.ndarray") -> np.ndarray:
    """Correlation matrix corresponding to a covariance matrix."""
    matrix = v.matrix if isinstance(v, BlockCovariance) else np.asarray(v, dtype=float)
    diag = np.diag(matrix)
    if np.any(diag <= 0):
        raise ValueError("covariance matrix has nonpositive diagonal entries")
    scale = 1.0 / np.sqrt(diag)
    return matrix * scale[:, None] * scale[None, :]


def assemble_study_v(spec: "DesignSpec", cluster_v: BlockCovariance) -> np.ndarray:
    """Block-diagonal covariance of the whole study, cluster by cluster.

    Clusters with the same size share cluster_v's matrix; other sizes are
    rebuilt from its stored components.
    """
    sizes = spec.cluster_subject_counts()
    family = cluster_v.family
    n_times = cluster_v.n_times

    by_size: dict[int, np.ndarray] = {cluster_v.n_subjects: cluster_v.matrix}
    blocks = []
    total = 0
    for size in sizes:
        if size not in by_size:
            by_size[size] = _cluster_matrix(cluster_v.components, family, size, n_times)
        blocks.append(by_size[size])
        total += by_size[size].shape[0]

    if total > MAX_MATRIX_ROWS:
        raise ValueError(
            f"study covariance would have {total} rows; limit is {MAX_MATRIX_ROWS}"
        )

    out = np.zeros((total, total))
    at = 0
    for block in blocks:
        k = block.shape[0]
        out[at : at + k, at : at + k] = block
        at += k
    return out
