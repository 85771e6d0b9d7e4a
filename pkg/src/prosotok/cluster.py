"""Fit the universal prosody model.

F0: Lloyd's k-means with k-means++ seeding over the normalized voiced F0
values of all speakers pooled, best of several restarts by within-cluster
sum of squares (WCSS).

Duration: per phone label, a balanced equal-count split of the sorted
durations into contiguous groups whose sizes differ by at most one; the
group mean is the interval representative and interval boundaries sit at
the midpoint between adjacent group extremes. Phones with too few samples
fall back to intervals fitted on the pooled durations of all phones.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .data import DurationIntervals, ProsodyModel, SpeakerStats
from .errors import InsufficientDataError, ValidationError
from .features import PhoneFeature
from .norm import normalize

DEFAULT_K = 15
DEFAULT_RESTARTS = 10
DEFAULT_MAX_ITER = 300
DEFAULT_TOL = 1e-10


def kmeans_1d(
    values: Sequence[float],
    k: int,
    *,
    restarts: int = DEFAULT_RESTARTS,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> np.ndarray:
    """Cluster scalar values, returning k centroids sorted ascending.

    Best of ``restarts`` runs by WCSS (ties keep the earliest restart).
    During assignment, equidistant values go to the lower-index centroid;
    a cluster left empty is re-seeded to the point farthest from its
    assigned centroid.
    """
    v = np.asarray(values, dtype=np.float64)
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if v.size < k or np.unique(v).size < k:
        raise InsufficientDataError(
            f"need at least {k} distinct values, got {np.unique(v).size} "
            f"distinct of {v.size} total"
        )
    seeds = np.random.SeedSequence(seed).spawn(restarts)
    best_centers: np.ndarray | None = None
    best_wcss = np.inf
    for child in seeds:
        rng = np.random.default_rng(child)
        centers = _kmeanspp_init(v, k, rng)
        centers, run_wcss = _lloyd(v, centers, max_iter=max_iter, tol=tol)
        if run_wcss < best_wcss:
            best_wcss = run_wcss
            best_centers = centers
    assert best_centers is not None
    return np.sort(best_centers)


def _kmeanspp_init(v: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++: each next center drawn with probability proportional to the
    squared distance from the nearest already-chosen center."""
    centers = np.empty(k)
    centers[0] = v[rng.integers(v.size)]
    d2 = (v - centers[0]) ** 2
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[j] = v[rng.integers(v.size)]
            continue
        idx = rng.choice(v.size, p=d2 / total)
        centers[j] = v[idx]
        np.minimum(d2, (v - centers[j]) ** 2, out=d2)
    return centers


def _lloyd(
    v: np.ndarray,
    centers: np.ndarray,
    *,
    max_iter: int,
    tol: float,
    wcss_trace: list[float] | None = None,
) -> tuple[np.ndarray, float]:
    """Lloyd iterations until the assignment stabilizes, centroid movement
    drops to ``tol``, or ``max_iter`` is hit. Returns (centers, final WCSS)."""
    centers = centers.astype(np.float64, copy=True)
    k = len(centers)
    prev_assign: np.ndarray | None = None
    for _ in range(max_iter):
        assign = _assign(v, centers)
        assign = _fix_empty_clusters(v, centers, assign, k)
        new_centers = np.array(
            [v[assign == j].mean() if (assign == j).any() else centers[j] for j in range(k)]
        )
        if wcss_trace is not None:
            wcss_trace.append(float(((v - new_centers[assign]) ** 2).sum()))
        movement = np.abs(new_centers - centers).max()
        centers = new_centers
        if prev_assign is not None and np.array_equal(assign, prev_assign):
            break
        prev_assign = assign
        if movement <= tol:
            break
    assign = _assign(v, centers)
    wcss = float(((v - centers[assign]) ** 2).sum())
    return centers, wcss


def _assign(v: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # argmin keeps the first (lowest-index) centroid on exact distance ties
    return np.abs(v[:, None] - centers[None, :]).argmin(axis=1)


def _fix_empty_clusters(
    v: np.ndarray, centers: np.ndarray, assign: np.ndarray, k: int
) -> np.ndarray:
    """Re-seed empty clusters to points farthest from their assigned centroid
    (in place on ``centers``), reassigning until none are empty. Bounded at k
    passes; with >= k distinct values a pass always fills the relocated
    cluster, so the bound is never hit in practice."""
    for _ in range(k):
        counts = np.bincount(assign, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            break
        dist = np.abs(v - centers[assign])
        for j in empty:
            idx = int(dist.argmax())
            centers[j] = v[idx]
            dist[idx] = -np.inf
        assign = _assign(v, centers)
    return assign


def wcss_of(values: Sequence[float], centroids: Sequence[float]) -> float:
    """Canonical WCSS of a clustering: assign every value to its nearest
    centroid, recompute each cluster mean, sum squared deviations.

    Operates on sorted values so the result is reproducible independently of
    input order; used to compare clusterings for exact optimality.
    """
    v = np.sort(np.asarray(values, dtype=np.float64))
    c = np.asarray(centroids, dtype=np.float64)
    assign = _assign(v, c)
    total = 0.0
    for j in range(len(c)):
        members = v[assign == j]
        if members.size:
            total += float(((members - members.mean()) ** 2).sum())
    return total


def balanced_intervals(
    values: Sequence[float], k: int
) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Equal-count split of the sorted values into k contiguous groups.

    Group sizes differ by at most one, larger groups first. Returns
    (boundaries, representatives): the representative of a group is its mean
    and each boundary is the midpoint between adjacent group extremes.
    Duplicates at a split are separated by index, so equal values may land
    in adjacent groups (and can produce tied representatives).
    """
    v = np.sort(np.asarray(values, dtype=np.float64), kind="stable")
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if v.size < k:
        raise InsufficientDataError(f"need at least {k} values, got {v.size}")
    edges = np.cumsum([0] + balanced_split_sizes(v.size, k))
    groups = [v[edges[i] : edges[i + 1]] for i in range(k)]
    representatives = tuple(float(g.mean()) for g in groups)
    boundaries = tuple(
        float((groups[i][-1] + groups[i + 1][0]) / 2.0) for i in range(k - 1)
    )
    return boundaries, representatives


def balanced_split_sizes(n: int, k: int) -> list[int]:
    """Group sizes used by ``balanced_intervals`` (remainder to the front)."""
    q, r = divmod(n, k)
    return [q + 1] * r + [q] * (k - r)


def fit_model(
    features: Sequence[PhoneFeature],
    stats: Mapping[str, SpeakerStats],
    k_f0: int = DEFAULT_K,
    k_dur: int = DEFAULT_K,
    *,
    restarts: int = DEFAULT_RESTARTS,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> ProsodyModel:
    """Fit centroids and intervals from (augmented plus original) features.

    ``stats`` must cover every speaker present. Unvoiced phones contribute
    to duration fitting only. A phone label gets its own duration intervals
    when it has at least ``k_dur`` samples and they quantize into strictly
    ascending representatives; otherwise it uses the global fallback.
    """
    speakers_present = {f.speaker for f in features}
    missing = speakers_present - set(stats)
    if missing:
        raise ValidationError(f"no speaker stats for {sorted(missing)}")

    z = [normalize(f.f0_hz, stats[f.speaker]) for f in features if f.f0_hz is not None]
    centroids = kmeans_1d(
        z, k_f0, restarts=restarts, max_iter=max_iter, tol=tol, seed=seed
    )

    durations_by_phone: dict[str, list[float]] = {}
    for f in features:
        durations_by_phone.setdefault(f.phone, []).append(f.duration_s)
    all_durations = [f.duration_s for f in features]
    try:
        dur_global = DurationIntervals(*balanced_intervals(all_durations, k_dur))
    except ValidationError as exc:
        raise InsufficientDataError(f"global duration pool: {exc}") from exc

    dur_intervals: dict[str, DurationIntervals] = {}
    for phone in sorted(durations_by_phone):
        values = durations_by_phone[phone]
        if len(values) < k_dur:
            continue
        try:
            dur_intervals[phone] = DurationIntervals(*balanced_intervals(values, k_dur))
        except ValidationError:
            # duplicate-heavy phone quantizes to tied representatives
            continue

    return ProsodyModel(
        k_f0=k_f0,
        k_dur=k_dur,
        f0_centroids=tuple(float(c) for c in centroids),
        dur_intervals=dur_intervals,
        dur_global=dur_global,
        speakers=dict(sorted(stats.items())),
    )
