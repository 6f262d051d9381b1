"""Command-line harness.

Exit codes: 0 success, 1 validation error, 2 I/O or file-format error.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .dataset import SynthConfig, read_feature_pack, synth_generate, write_feature_pack
from .errors import CuriolearnError, PackFormatError, ValidationError
from .classifier import TrainConfig
from .harness import (
    ExperimentConfig,
    aggregate_logs,
    run_suite,
    write_metrics,
)
from .report import render_figures, render_from_json
from .sampler import STRATEGIES, StrategyConfig


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except PackFormatError as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(2)
        except CuriolearnError as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(1)
        except OSError as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(2)
    return wrapper


def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as err:
        raise ValidationError(f"bad {what} list {text!r}: {err}") from err


@click.group()
def main() -> None:
    """Curiosity-driven online class-incremental learning experiments."""


@main.command()
@click.option("--classes", type=int, default=10, show_default=True)
@click.option("--instances", type=int, default=50, show_default=True,
              help="Object instances per class.")
@click.option("--views", type=int, default=5, show_default=True,
              help="Views (images) per object instance.")
@click.option("--dim", type=int, default=32, show_default=True)
@click.option("--sessions", type=int, default=5, show_default=True,
              help="Session count; instances are tagged round-robin.")
@click.option("--class-spread", type=float, default=1.5, show_default=True)
@click.option("--intra-spread", type=float, default=1.0, show_default=True)
@click.option("--view-noise", type=float, default=1.5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@_guarded
def synth(classes, instances, views, dim, sessions, class_spread, intra_spread,
          view_noise, seed, out) -> None:
    """Generate a synthetic feature pack."""
    cfg = SynthConfig(
        num_classes=classes, instances_per_class=instances,
        views_per_instance=views, dimension=dim,
        class_center_spread=class_spread, intra_class_spread=intra_spread,
        view_noise=view_noise, num_sessions=sessions,
    )
    ds = synth_generate(cfg, seed)
    write_feature_pack(ds, out)
    click.echo(f"wrote {out}: {len(ds.objects)} objects, "
               f"{ds.num_images} images, d={ds.dimension}")


@main.command()
@click.option("--pack", type=click.Path(path_type=Path), required=True)
@_guarded
def verify(pack) -> None:
    """Check a feature pack's format and invariants, print its counts."""
    ds = read_feature_pack(pack)
    click.echo(f"pack: {pack}")
    click.echo(f"dimension: {ds.dimension}")
    click.echo(f"classes: {ds.num_classes}")
    click.echo(f"objects: {len(ds.objects)}")
    click.echo(f"images: {ds.num_images}")
    per_class: dict[int, int] = {}
    for obj in ds.objects:
        per_class[obj.class_id] = per_class.get(obj.class_id, 0) + 1
    counts = " ".join(f"{cid}={n}" for cid, n in sorted(per_class.items()))
    click.echo(f"objects per class: {counts}")
    if ds.class_names:
        click.echo(f"class names: {', '.join(ds.class_names)}")


def _load_synth_config(path: Path) -> tuple[SynthConfig, int, set[int] | None]:
    raw = json.loads(Path(path).read_text())
    seed = raw.pop("seed", 0)
    sessions = raw.pop("test_sessions", None)
    known = set(SynthConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ValidationError(f"{path}: unknown synth config keys {sorted(unknown)}")
    return SynthConfig(**raw), seed, set(sessions) if sessions is not None else None


@main.command()
@click.option("--pack", type=click.Path(path_type=Path), default=None,
              help="Feature pack to run on (alternative to --synth-config).")
@click.option("--synth-config", type=click.Path(path_type=Path), default=None,
              help="JSON file of synthetic-dataset parameters.")
@click.option("--strategy", default="curiosity", show_default=True,
              help="One of curiosity|softmax|random, or a comma list.")
@click.option("--lambda", "distance_weight", type=float, default=0.7,
              show_default=True, help="Weight on the distance term of the score.")
@click.option("--distance-threshold", type=float, default=17.5, show_default=True)
@click.option("--batch-m", type=int, default=5, show_default=True)
@click.option("--budget-k", type=int, default=1, show_default=True)
@click.option("--seeds", default="1,2,3,4,5", show_default=True)
@click.option("--report-increments", type=int, default=50, show_default=True)
@click.option("--max-increments", type=int, default=None,
              help="Stop the run after this many increments (default: full schedule).")
@click.option("--softmax-select", type=click.Choice(["lowest", "highest"]),
              default="lowest", show_default=True)
@click.option("--normalize-q", is_flag=True, default=False,
              help="Min-max normalize mean distances within each batch.")
@click.option("--epochs", type=int, default=40, show_default=True)
@click.option("--lr", type=float, default=0.01, show_default=True)
@click.option("--batch-size", type=int, default=64, show_default=True)
@click.option("--test-sessions", default=None,
              help="Comma list of session ids held out for testing "
                   "[default: 3,7,10 for packs; synth config value otherwise].")
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--format", "out_format", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
@click.option("--save-model", type=click.Path(path_type=Path), default=None,
              help="Directory for per-run centroid model snapshots.")
@click.option("--load-model", type=click.Path(path_type=Path), default=None,
              help="Start every run from this centroid model snapshot.")
@click.option("--plots", is_flag=True, default=False,
              help="Render comparison figures next to the metrics output.")
@_guarded
def run(pack, synth_config, strategy, distance_weight, distance_threshold,
        batch_m, budget_k, seeds, report_increments, max_increments,
        softmax_select, normalize_q, epochs, lr, batch_size, test_sessions,
        out, out_format, save_model, load_model, plots) -> None:
    """Run the increment-loop experiment and write metrics."""
    if (pack is None) == (synth_config is None):
        raise ValidationError("exactly one of --pack or --synth-config is required")

    kinds = [k.strip() for k in strategy.split(",") if k.strip()]
    for kind in kinds:
        if kind not in STRATEGIES:
            raise ValidationError(f"unknown strategy {kind!r}")
    strategies = [
        StrategyConfig(
            kind=kind, distance_weight=distance_weight, budget=budget_k,
            softmax_direction=softmax_select, normalize_distances=normalize_q)
        for kind in kinds
    ]

    synth_cfg = None
    synth_seed = 0
    sessions: set[int] | None = None
    if synth_config is not None:
        synth_cfg, synth_seed, sessions = _load_synth_config(synth_config)
    if test_sessions is not None:
        sessions = set(_parse_int_list(test_sessions, "test session"))
    if sessions is None:
        sessions = {3, 7, 10}

    cfg = ExperimentConfig(
        strategies=strategies,
        seeds=_parse_int_list(seeds, "seed"),
        distance_threshold=distance_threshold,
        batch_m=batch_m,
        increments_to_report=report_increments,
        max_increments=max_increments,
        train_cfg=TrainConfig(epochs=epochs, learning_rate=lr, batch_size=batch_size),
        test_sessions=frozenset(sessions),
        pack_path=pack,
        synth=synth_cfg,
        synth_seed=synth_seed,
        load_model=load_model,
    )

    if save_model is not None:
        Path(save_model).mkdir(parents=True, exist_ok=True)
    logs = run_suite(cfg, save_model_dir=save_model)
    write_metrics(logs, out, out_format)
    click.echo(f"wrote {out} ({len(logs)} runs)")
    if plots:
        figures = render_figures(aggregate_logs(logs), Path(out).parent, stem=Path(out).stem)
        for fig_path in figures:
            click.echo(f"wrote {fig_path}")


@main.command()
@click.option("--metrics", type=click.Path(path_type=Path), required=True,
              help="JSON metrics file written by run --format json.")
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
@_guarded
def report(metrics, out_dir) -> None:
    """Render comparison figures from a JSON metrics file."""
    for fig_path in render_from_json(metrics, out_dir):
        click.echo(f"wrote {fig_path}")


if __name__ == "__main__":
    main()
