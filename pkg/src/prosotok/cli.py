"""Command line pipeline with deterministic, file-based stages.

Stages read and write only their declared files, so every stage can be re-run
and composed: extract -> features -> augment -> fit -> label -> report, plus
control, adapt and select-corpus. Exit status 0 on success, 1 on validation
or usage errors, 2 on I/O errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .augment import augment_dataset
from .cluster import DEFAULT_K, DEFAULT_MAX_ITER, DEFAULT_RESTARTS, DEFAULT_TOL, fit_model
from .coverage import select_cover
from .data import (
    ORIGIN_ORIGINAL,
    Utterance,
    load_manifest,
    load_model,
    save_manifest,
    save_model,
)
from .errors import ProsotokError, UsageError, ValidationError
from .features import (
    group_by_utterance,
    phone_features,
    read_features_tsv,
    write_features_tsv,
)
from .labeling import (
    ControlSpec,
    adapt_speaker,
    apply_control,
    ascending_report,
    label_utterance,
    load_tokens,
    save_tokens,
)
from .norm import fit_all_speaker_stats
from .pitch import PitchConfig, cache_path, extract_f0, load_track, read_wav, save_track
from .plotting import render_ascending_figure

SEED_ENV_VAR = "PROSOTOK_SEED"


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs shared across stages, resolved from flags and environment.

    ``seed`` stays None for stages that do not draw random numbers; the
    stages that do (augment, fit) must call ``require_seed``.
    """

    seed: int | None = None
    k_f0: int = DEFAULT_K
    k_dur: int = DEFAULT_K
    pitch: PitchConfig = PitchConfig()

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "PipelineConfig":
        seed = getattr(args, "seed", None)
        if seed is None:
            env = os.environ.get(SEED_ENV_VAR)
            if env is not None:
                try:
                    seed = int(env)
                except ValueError:
                    raise ValidationError(f"{SEED_ENV_VAR}={env!r} is not an integer")
        pitch = _pitch_config(args) if hasattr(args, "f_min") else PitchConfig()
        return cls(
            seed=seed,
            k_f0=getattr(args, "k_f0", DEFAULT_K),
            k_dur=getattr(args, "k_dur", DEFAULT_K),
            pitch=pitch,
        )

    def require_seed(self) -> int:
        if self.seed is None:
            raise ValidationError(f"a seed is required (--seed or {SEED_ENV_VAR})")
        return self.seed


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; route through UsageError for status 1
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if not exc.code else 1
    try:
        args.func(args)
        return 0
    except ProsotokError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="prosotok", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract", help="compute and cache F0 tracks")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--f0-cache", required=True, type=Path, help="directory for .f0 records")
    _add_pitch_flags(p)
    p.add_argument("--jobs", type=int, default=1, help="worker threads")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("features", help="per-phone F0 and duration table")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path, help="features .tsv")
    p.add_argument("--f0-cache", type=Path, help="reuse cached tracks, cache new ones")
    _add_pitch_flags(p)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("augment", help="double the dataset in feature space")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--in", dest="manifest_in", required=True, type=Path)
    p.add_argument("--out", dest="manifest_out", required=True, type=Path)
    p.add_argument("--features-in", required=True, type=Path)
    p.add_argument("--features-out", required=True, type=Path)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("fit", help="fit centroids and duration intervals")
    p.add_argument("--k-f0", type=int, default=DEFAULT_K)
    p.add_argument("--k-dur", type=int, default=DEFAULT_K)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--features", required=True, type=Path)
    p.add_argument(
        "--stats-from-manifest",
        type=Path,
        default=None,
        help="restrict fitting to utterances listed in this manifest",
    )
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("label", help="assign prosody tokens per phone")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--features", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path, help="tokens .jsonl")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("control", help="offset or fix token sequences")
    p.add_argument("--in", dest="tokens_in", required=True, type=Path)
    p.add_argument("--out", dest="tokens_out", required=True, type=Path)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--f0-offset", type=int, default=None)
    g.add_argument("--fix-f0", type=int, default=None)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--dur-offset", type=int, default=None)
    g.add_argument("--fix-dur", type=int, default=None)
    p.add_argument("--k", type=int, default=DEFAULT_K, help="token range is [0, k-1]")
    p.set_defaults(func=cmd_control)

    p = sub.add_parser("adapt", help="add a speaker to a frozen model")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--speaker", required=True)
    p.add_argument("--features", required=True, type=Path, help="new speaker's features .tsv")
    p.add_argument(
        "--from-speaker",
        default=None,
        help="use only rows with this speaker tag (default: all rows)",
    )
    p.add_argument("--replace", action="store_true", help="allow overwriting an existing speaker")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_adapt)

    p = sub.add_parser("select-corpus", help="greedy phonetic-coverage ordering")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--phones", type=Path, default=None, help="target phones, one per line")
    p.add_argument("--out", required=True, type=Path, help="selection list, one id per line")
    p.add_argument("--report", type=Path, default=None, help="coverage .tsv")
    p.set_defaults(func=cmd_select_corpus)

    p = sub.add_parser("report", help="evaluation reports")
    p.add_argument("mode", choices=["ascending"])
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--features", required=True, type=Path)
    p.add_argument("--speaker", required=True)
    p.add_argument("--out", required=True, type=Path, help="report .tsv")
    p.add_argument("--figure", type=Path, default=None, help="figure path (default: <out>.png)")
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=cmd_report)

    return parser


def _add_pitch_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--f-min", type=float, default=PitchConfig.f_min)
    p.add_argument("--f-max", type=float, default=PitchConfig.f_max)
    p.add_argument("--frame", type=float, default=PitchConfig.frame_s, help="frame length (s)")
    p.add_argument("--hop", type=float, default=PitchConfig.hop_s, help="hop length (s)")
    p.add_argument("--yin-threshold", type=float, default=PitchConfig.yin_threshold)


def _pitch_config(args: argparse.Namespace) -> PitchConfig:
    return PitchConfig(
        f_min=args.f_min,
        f_max=args.f_max,
        frame_s=args.frame,
        hop_s=args.hop,
        yin_threshold=args.yin_threshold,
    )


def _original_only(utterances: list[Utterance], stage: str) -> list[Utterance]:
    augmented = [u.id for u in utterances if u.origin != ORIGIN_ORIGINAL]
    if augmented:
        raise ValidationError(
            f"{stage} works on original recordings; augmented entries such as "
            f"{augmented[0]!r} get their features from the augment stage"
        )
    return utterances


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_extract(args: argparse.Namespace) -> None:
    cfg = PipelineConfig.from_args(args).pitch
    utterances = _original_only(load_manifest(args.manifest), "extract")
    args.f0_cache.mkdir(parents=True, exist_ok=True)

    def run(utt: Utterance) -> None:
        track = extract_f0(read_wav(utt.audio_path), cfg)
        save_track(track, cache_path(args.f0_cache, utt.id))

    _map_jobs(run, utterances, args.jobs)
    print(f"extracted {len(utterances)} tracks into {args.f0_cache}")


def cmd_features(args: argparse.Namespace) -> None:
    cfg = PipelineConfig.from_args(args).pitch
    utterances = _original_only(load_manifest(args.manifest), "features")
    if args.f0_cache is not None:
        args.f0_cache.mkdir(parents=True, exist_ok=True)

    def run(utt: Utterance) -> list:
        track = None
        if args.f0_cache is not None:
            p = cache_path(args.f0_cache, utt.id)
            if p.exists():
                track = load_track(p)
        if track is None:
            track = extract_f0(read_wav(utt.audio_path), cfg)
            if args.f0_cache is not None:
                save_track(track, cache_path(args.f0_cache, utt.id))
        return phone_features(utt, track)

    rows = [f for feats in _map_jobs(run, utterances, args.jobs) for f in feats]
    write_features_tsv(args.out, rows)
    print(f"wrote {len(rows)} phone features for {len(utterances)} utterances to {args.out}")


def cmd_augment(args: argparse.Namespace) -> None:
    seed = PipelineConfig.from_args(args).require_seed()
    utterances = _original_only(load_manifest(args.manifest_in), "augment")
    feats = read_features_tsv(args.features_in)
    out_utts, out_feats = augment_dataset(utterances, feats, seed)
    save_manifest(args.manifest_out, out_utts)
    write_features_tsv(args.features_out, out_feats)
    print(f"augmented {len(utterances)} -> {len(out_utts)} utterances (seed {seed})")


def cmd_fit(args: argparse.Namespace) -> None:
    cfg = PipelineConfig.from_args(args)
    seed = cfg.require_seed()
    feats = read_features_tsv(args.features)
    if args.stats_from_manifest is not None:
        ids = {u.id for u in load_manifest(args.stats_from_manifest)}
        feats = [f for f in feats if f.utterance_id in ids]
        if not feats:
            raise ValidationError(
                f"no features match the utterances of {args.stats_from_manifest}"
            )
    stats = fit_all_speaker_stats(feats)
    model = fit_model(
        feats,
        stats,
        cfg.k_f0,
        cfg.k_dur,
        restarts=args.restarts,
        max_iter=args.max_iter,
        tol=args.tol,
        seed=seed,
    )
    save_model(model, args.out)
    print(
        f"fit model on {len(feats)} features, {len(stats)} speakers, "
        f"{len(model.dur_intervals)} per-phone interval sets -> {args.out}"
    )


def cmd_label(args: argparse.Namespace) -> None:
    model = load_model(args.model)
    utterances = load_manifest(args.manifest)
    grouped = group_by_utterance(read_features_tsv(args.features))
    sequences = []
    for utt in utterances:
        feats = grouped.get(utt.id)
        if feats is None:
            raise ValidationError(f"no features for utterance {utt.id!r}")
        sequences.append(label_utterance(utt, feats, model, utt.speaker))
    save_tokens(args.out, sequences)
    print(f"labeled {len(sequences)} utterances -> {args.out}")


def cmd_control(args: argparse.Namespace) -> None:
    spec = ControlSpec(
        f0_offset=args.f0_offset,
        dur_offset=args.dur_offset,
        fixed_f0_cluster=args.fix_f0,
        fixed_dur_cluster=args.fix_dur,
    )
    if all(
        v is None for v in (args.f0_offset, args.dur_offset, args.fix_f0, args.fix_dur)
    ):
        raise UsageError("nothing to do: pass --f0-offset/--fix-f0/--dur-offset/--fix-dur")
    sequences = [
        apply_control(t, spec, args.k, args.k) for t in load_tokens(args.tokens_in)
    ]
    save_tokens(args.tokens_out, sequences)
    print(f"controlled {len(sequences)} utterances -> {args.tokens_out}")


def cmd_adapt(args: argparse.Namespace) -> None:
    model = load_model(args.model)
    feats = read_features_tsv(args.features)
    if args.from_speaker is not None:
        feats = [f for f in feats if f.speaker == args.from_speaker]
    adapted = adapt_speaker(model, feats, args.speaker, replace_existing=args.replace)
    save_model(adapted, args.out)
    print(f"adapted speaker {args.speaker!r} onto frozen model -> {args.out}")


def cmd_select_corpus(args: argparse.Namespace) -> None:
    utterances = load_manifest(args.manifest)
    targets = None
    if args.phones is not None:
        targets = [ln.strip() for ln in args.phones.read_text().splitlines() if ln.strip()]
    result = select_cover(utterances, targets, args.budget)
    args.out.write_text(
        "\n".join(result.ordering) + ("\n" if result.ordering else ""), encoding="utf-8"
    )
    if args.report is not None:
        _write_coverage_report(args.report, result, utterances, targets)
    prefix = result.cover_prefix_len if result.cover_prefix_len is not None else "unreachable"
    print(f"ordered {len(result.ordering)} utterances, full coverage at prefix {prefix}")
    if result.uncovered:
        print(f"uncovered phones: {' '.join(sorted(result.uncovered))}")


def _write_coverage_report(path, result, utterances, targets) -> None:
    phones_by_id = {u.id: {p.label for p in u.phones()} for u in utterances}
    target_set = (
        set(targets) if targets is not None else set().union(*phones_by_id.values())
    )
    lines = ["rank\tutterance_id\tnew_phones\tcovered\ttargets"]
    covered: set[str] = set()
    for rank, utt_id in enumerate(result.ordering, 1):
        new = (phones_by_id[utt_id] & target_set) - covered
        covered |= new
        lines.append(f"{rank}\t{utt_id}\t{len(new)}\t{len(covered)}\t{len(target_set)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_report(args: argparse.Namespace) -> None:
    model = load_model(args.model)
    utterances = [u for u in load_manifest(args.manifest) if u.speaker == args.speaker]
    if not utterances:
        raise ValidationError(f"no utterances for speaker {args.speaker!r} in manifest")
    grouped = group_by_utterance(read_features_tsv(args.features))
    rows = ascending_report(utterances, grouped, model, args.speaker)
    lines = ["cluster_id\tmean_f0_hz\tmean_dur_s"]
    lines += [f"{c}\t{f0!r}\t{dur!r}" for c, f0, dur in rows]
    args.out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    if not args.no_figure:
        figure = args.figure if args.figure is not None else args.out.with_suffix(".png")
        render_ascending_figure(rows, figure, speaker=args.speaker)
        print(f"report -> {args.out}, figure -> {figure}")
    else:
        print(f"report -> {args.out}")


def _map_jobs(fn, items, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


if __name__ == "__main__":
    entrypoint()
