"""Order utterances by phonological diversity for low-resource selection.

Greedy max-coverage: repeatedly pick the utterance contributing the most
not-yet-covered target phones, so a short prefix of the ordering already
contains every phone at least once. Once coverage is complete (or stalled),
the remaining utterances follow in descending distinct-phone count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .data import Utterance


@dataclass(frozen=True)
class CoverageResult:
    """Outcome of the greedy ordering.

    ``cover_prefix_len`` is the length of the shortest ordering prefix that
    covers every target phone, or None when the corpus cannot cover them all
    (it refers to the untruncated ordering and may exceed a budget cut).
    ``uncovered`` lists target phones absent from the whole corpus.
    """

    ordering: tuple[str, ...]
    cover_prefix_len: int | None
    uncovered: frozenset[str]


def select_cover(
    utterances: Sequence[Utterance],
    target_phones: Iterable[str] | None = None,
    budget: int | None = None,
) -> CoverageResult:
    """Greedily order utterances for maximal phonetic coverage.

    Ties are broken by more distinct phones overall, then shorter utterance
    span, then lexicographic id, which makes the ordering deterministic.
    ``budget`` truncates the returned ordering after the greedy pass.
    """
    infos = []
    for u in utterances:
        phones = u.phones()
        infos.append(
            (
                u.id,
                frozenset(p.label for p in phones),
                phones[-1].end_s - phones[0].start_s,
            )
        )
    corpus_phones = frozenset().union(*(ph for _, ph, _ in infos)) if infos else frozenset()
    targets = frozenset(target_phones) if target_phones is not None else corpus_phones

    covered: set[str] = set()
    ordering: list[str] = []
    cover_prefix_len: int | None = 0 if not targets else None
    remaining = list(infos)
    while remaining and not targets <= covered:
        best_i = min(
            range(len(remaining)),
            key=lambda i: (
                -len((remaining[i][1] & targets) - covered),
                -len(remaining[i][1]),
                remaining[i][2],
                remaining[i][0],
            ),
        )
        utt_id, phones, _ = remaining[best_i]
        if not (phones & targets) - covered:
            break  # nothing left in the corpus can extend coverage
        ordering.append(utt_id)
        covered |= phones & targets
        del remaining[best_i]
        if cover_prefix_len is None and targets <= covered:
            cover_prefix_len = len(ordering)

    remaining.sort(key=lambda info: (-len(info[1]), info[2], info[0]))
    ordering.extend(utt_id for utt_id, _, _ in remaining)

    if budget is not None:
        ordering = ordering[:budget]
    return CoverageResult(
        ordering=tuple(ordering),
        cover_prefix_len=cover_prefix_len,
        uncovered=frozenset(targets - corpus_phones),
    )


def coverage_prefix_length(
    ordering: Sequence[str],
    utterances: Sequence[Utterance],
    targets: frozenset[str] | set[str],
) -> int | None:
    """Shortest prefix of an arbitrary ordering covering all targets."""
    phones_by_id = {u.id: {p.label for p in u.phones()} for u in utterances}
    covered: set[str] = set()
    for i, utt_id in enumerate(ordering, 1):
        covered |= phones_by_id[utt_id] & set(targets)
        if set(targets) <= covered:
            return i
    return None
