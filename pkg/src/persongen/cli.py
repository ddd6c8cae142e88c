"""Command-line interface covering the full workflow: corpus creation,
pair mining, training, evaluation, generation and serving."""

from __future__ import annotations

import os
import sys

import click
import numpy as np

from .corpus import (
    load_keypoints_json,
    make_synthetic_corpus,
    scan_corpus,
)
from .pair_miner import PairIndex, mine_pairs, mining_records_from_corpus
from .representation import load_semantic_map_png, save_image_png
from .trainer import (
    TrainConfig,
    init_state,
    load_checkpoint,
    run_phases,
    save_checkpoint,
    save_sample_grid,
    write_history_csv,
)


@click.group()
def main():
    """Unsupervised pose-guided person image generation."""


def _scan_or_die(corpus_root, split=None):
    records, errors = scan_corpus(corpus_root)
    for e in errors:
        click.echo(f"warning: {e.image_id}: {e.message}", err=True)
    if split:
        records = [r for r in records if r.split == split]
    if not records:
        click.echo("error: no usable records in corpus", err=True)
        sys.exit(1)
    return records


@main.command("make-corpus")
@click.option("--out", required=True, type=click.Path())
@click.option("--outfits", default=25, show_default=True)
@click.option("--poses-per-outfit", default=8, show_default=True)
@click.option("--seed", default=0, show_default=True)
def make_corpus_cmd(out, outfits, poses_per_outfit, seed):
    """Render the synthetic paper-doll corpus."""
    manifest = make_synthetic_corpus(out, n_outfits=outfits, poses_per_outfit=poses_per_outfit, seed=seed)
    click.echo(f"wrote {len(manifest)} records to {out}")


@main.command("mine-pairs")
@click.option("--corpus", "corpus_root", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--pose-threshold", default=2.0, show_default=True, help="pixels")
@click.option("--penalty", default="area", show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--split", default="train", show_default=True)
def mine_pairs_cmd(corpus_root, out, pose_threshold, penalty, workers, split):
    """Search pseudo ground-truth semantic-map pairs."""
    records = _scan_or_die(corpus_root, split)
    if penalty != "area":
        penalty = float(penalty)
    index = mine_pairs(
        mining_records_from_corpus(records), threshold=pose_threshold,
        penalty=penalty, workers=workers,
    )
    index.save(out)
    click.echo(f"mined {len(index.entries)} pairs from {len(records)} records -> {out}")


@main.command("config-defaults")
def config_defaults_cmd():
    """Print every training config key with its default."""
    click.echo(TrainConfig().to_text(), nl=False)


@main.command("train")
@click.option("--phase", type=click.Choice(["1", "2", "3", "all"]), default="all", show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--corpus", "corpus_root", required=True, type=click.Path(exists=True))
@click.option("--pairs", "pairs_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--resume", "resume_path", type=click.Path(exists=True))
def train_cmd(phase, config_path, corpus_root, pairs_path, out_dir, resume_path):
    """Run the training schedule and write checkpoints + loss CSV."""
    os.makedirs(out_dir, exist_ok=True)
    config = TrainConfig.from_file(config_path) if config_path else TrainConfig()
    records = _scan_or_die(corpus_root, "train")
    index = PairIndex.load(pairs_path) if pairs_path else None
    state = load_checkpoint(resume_path) if resume_path else init_state(config)
    phases = [1, 2, 3] if phase == "all" else [int(phase)]
    if not config.use_parsing:
        phases = [p for p in phases if p != 1]
    run_phases(state, records, index, phases, out_dir=out_dir)
    save_checkpoint(state, os.path.join(out_dir, "final.pt"))
    write_history_csv(state, os.path.join(out_dir, "loss.csv"))
    try:
        save_sample_grid(state, records, os.path.join(out_dir, "samples.png"))
    except Exception as e:  # sample grids are best-effort
        click.echo(f"warning: sample grid failed: {e}", err=True)
    click.echo(f"finished at step {state.global_step}; checkpoints in {out_dir}")


@main.command("eval")
@click.option("--generated", required=True, type=click.Path(exists=True))
@click.option("--reference", required=True, type=click.Path(exists=True))
@click.option("--masks", type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--classifier", default="conv-random", show_default=True)
@click.option("--splits", default=10, show_default=True)
def eval_cmd(generated, reference, masks, out_path, classifier, splits):
    """Compute IS / SSIM (and masked variants) into a JSON report."""
    from .evalsuite import evaluate_directories, make_classifier

    report = evaluate_directories(
        generated, reference, masks, classifier=make_classifier(classifier), splits=splits
    )
    with open(out_path, "w") as f:
        f.write(report.to_json())
    click.echo(report.to_json())


def _engine(checkpoint, corpus_root):
    from .service import InferenceEngine

    records = _scan_or_die(corpus_root)
    return InferenceEngine.from_checkpoint(checkpoint, records)


@main.command("generate")
@click.option("--checkpoint", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_root", required=True, type=click.Path(exists=True))
@click.option("--ref", "ref_id", required=True)
@click.option("--target-pose", "pose_path", required=True, type=click.Path(exists=True),
              help="keypoints JSON file")
@click.option("--out", "out_path", required=True, type=click.Path())
def generate_cmd(checkpoint, corpus_root, ref_id, pose_path, out_path):
    """Pose transfer: reference record rendered under a new pose."""
    engine = _engine(checkpoint, corpus_root)
    pose = load_keypoints_json(pose_path)
    save_image_png(engine.pose_transfer(ref_id, pose), out_path)
    click.echo(out_path)


@main.command("transfer")
@click.option("--checkpoint", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_root", required=True, type=click.Path(exists=True))
@click.option("--a", "id_a", required=True)
@click.option("--b", "id_b", required=True)
@click.option("--out-dir", required=True, type=click.Path())
def transfer_cmd(checkpoint, corpus_root, id_a, id_b, out_dir):
    """Bidirectional clothing texture transfer between two records."""
    engine = _engine(checkpoint, corpus_root)
    os.makedirs(out_dir, exist_ok=True)
    ab, ba = engine.texture_transfer(id_a, id_b)
    path_ab = os.path.join(out_dir, f"{id_a}_to_{id_b}.png")
    path_ba = os.path.join(out_dir, f"{id_b}_to_{id_a}.png")
    save_image_png(ab, path_ab)
    save_image_png(ba, path_ba)
    click.echo(f"{path_ab}\n{path_ba}")


@main.command("manipulate")
@click.option("--checkpoint", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_root", required=True, type=click.Path(exists=True))
@click.option("--ref", "ref_id", required=True)
@click.option("--parse", "parse_path", required=True, type=click.Path(exists=True),
              help="edited parse PNG (canonical palette)")
@click.option("--out", "out_path", required=True, type=click.Path())
def manipulate_cmd(checkpoint, corpus_root, ref_id, parse_path, out_path):
    """Regenerate a record under a hand-edited semantic map."""
    engine = _engine(checkpoint, corpus_root)
    edited = load_semantic_map_png(parse_path)
    save_image_png(engine.manipulate(ref_id, edited), out_path)
    click.echo(out_path)


@main.command("serve")
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--checkpoint", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_root", required=True, type=click.Path(exists=True))
@click.option("--frontend", "frontend_dir", type=click.Path(), help="built editor assets to mount at /")
def serve_cmd(port, host, checkpoint, corpus_root, frontend_dir):
    """Run the HTTP generation service (and optionally the editor UI)."""
    from .service import serve

    engine = _engine(checkpoint, corpus_root)
    click.echo(f"serving checkpoint {engine.checkpoint_id} on {host}:{port}")
    serve(engine, port=port, host=host, frontend_dir=frontend_dir)


if __name__ == "__main__":
    main()
