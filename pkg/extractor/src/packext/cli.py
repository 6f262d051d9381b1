"""Command line: extract an image corpus to a feature pack, verify packs.

Exit codes: 0 success, 1 validation/layout error, 2 I/O or format error.
"""

from __future__ import annotations

import functools
import logging
import sys
from pathlib import Path

import click

from .layouts import LayoutError, scan_layout
from .packfile import PackError, read_pack


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (LayoutError, ValueError) as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(1)
        except PackError as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(2)
        except OSError as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(2)
    return wrapper


@click.group()
def main() -> None:
    """Feature-pack extraction from image corpora with a frozen CNN."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")


@main.command()
@click.option("--input", "input_root", type=click.Path(path_type=Path),
              required=True, help="Corpus root directory.")
@click.option("--layout", type=click.Choice(["core50", "generic"]),
              default="core50", show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--backbone", default="resnet18", show_default=True)
@click.option("--image-size", type=int, default=128, show_default=True)
@click.option("--device", default="auto", show_default=True)
@click.option("--batch-size", type=int, default=32, show_default=True)
@_guarded
def extract(input_root, layout, out, backbone, image_size, device, batch_size) -> None:
    """Extract one feature record per (object, session) pair."""
    # heavy imports stay local so `verify` works without loading torch
    import torch

    from .backbone import BackboneError, FeatureBackbone
    from .packfile import PackRecord, write_pack

    torch.set_num_threads(1)  # fixed threading keeps extraction bit-stable
    groups, num_classes, class_names = scan_layout(input_root, layout)
    try:
        net = FeatureBackbone(backbone, image_size=image_size, device=device,
                              batch_size=batch_size)
    except BackboneError as err:
        raise ValueError(str(err)) from err

    records = []
    skipped_total = 0
    for group in groups:
        features, skipped = net.extract_images(group.images)
        skipped_total += len(skipped)
        if features.shape[0] == 0:
            logging.getLogger(__name__).warning(
                "object %d session %d: no readable images, record dropped",
                group.object_id, group.session_id)
            continue
        records.append(PackRecord(
            group.object_id, group.class_id, group.session_id, features))
    if not records:
        raise ValueError(f"{input_root}: no extractable images found")
    write_pack(records, net.dimension, num_classes, out, class_names)
    total_images = sum(r.features.shape[0] for r in records)
    click.echo(f"wrote {out}: {len(records)} records, {total_images} images, "
               f"d={net.dimension}, pretrained={net.pretrained}")
    if skipped_total:
        click.echo(f"skipped {skipped_total} unreadable images", err=True)


@main.command()
@click.option("--pack", type=click.Path(path_type=Path), required=True)
@_guarded
def verify(pack) -> None:
    """Validate a feature pack and print its summary."""
    summary, _ = read_pack(pack)
    click.echo(f"pack: {pack}")
    click.echo(f"dimension: {summary.dimension}")
    click.echo(f"classes: {summary.num_classes}")
    click.echo(f"objects: {summary.num_objects}")
    click.echo(f"images: {summary.num_images}")
    counts = " ".join(f"{cid}={n}" for cid, n in sorted(summary.objects_per_class.items()))
    click.echo(f"objects per class: {counts}")
    if summary.class_names:
        click.echo(f"class names: {', '.join(summary.class_names)}")


if __name__ == "__main__":
    main()
