"""Figure rendering for the ascending-cluster report."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence


def render_ascending_figure(
    rows: Sequence[tuple[int, float, float]],
    path: Path | str,
    *,
    speaker: str | None = None,
    dpi: int = 150,
) -> None:
    """Plot mean decoded duration (left axis) and F0 (right axis) against
    cluster id and save to ``path`` (format from the file suffix)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ids = [r[0] for r in rows]
    f0 = [r[1] for r in rows]
    dur = [r[2] for r in rows]

    fig, ax_dur = plt.subplots(figsize=(7.0, 4.2))
    ax_f0 = ax_dur.twinx()
    (dur_line,) = ax_dur.plot(ids, dur, "o-", color="tab:blue", label="mean duration")
    (f0_line,) = ax_f0.plot(ids, f0, "s--", color="tab:red", label="mean F0")

    ax_dur.set_xlabel("cluster id")
    ax_dur.set_ylabel("mean phoneme duration (s)")
    ax_f0.set_ylabel("mean F0 (Hz)")
    ax_dur.set_xticks(ids)
    ax_dur.grid(True, alpha=0.3)
    title = "Prosody token sweep"
    if speaker:
        title += f" ({speaker})"
    ax_dur.set_title(title)
    ax_dur.legend(handles=[dur_line, f0_line], loc="upper left")

    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
