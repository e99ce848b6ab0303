"""Umbrella CLI: synth, pretrain, train, ablate, serve, bench."""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path

import click
import numpy as np

from . import __version__
from .errors import GestureForgeError
from .fingerspell import PretrainConfig, character_error_rate, export_embedder, pretrain
from .gesture import Regime, TrainSpec
from .landmarks import Handedness, LandmarkSequence, read_sequences, write_sequences
from .metrics import run_ablation, write_reports_jsonl, write_summary_csv
from .modelfile import load_embedder, load_model, save_embedder, save_fingerspell, save_model
from .synth import GenSpec, default_gesture_classes, gen_fingerspelling, gen_gesture_dataset, letter_poses
from .workflow import default_embedder, run_kshot_training, samples_from_sequences

log = logging.getLogger(__name__)


@click.group()
@click.version_option(version=__version__)
def main():
    """Custom hand-gesture recognition from skeletal landmarks."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")


def _load_embedder_opt(path: str | None):
    if path:
        return load_embedder(path), str(path)
    log.warning("no --embedder given; using the untrained default (seed 0)")
    return default_embedder(), "default-untrained(seed=0)"


@main.command()
@click.option("--words", type=int, default=0, help="Number of fingerspelling sequences.")
@click.option("--word-len-min", type=int, default=2, show_default=True)
@click.option("--word-len-max", type=int, default=5, show_default=True)
@click.option("--classes", type=str, default=None,
              help="Comma-separated gesture class names (default: the 7 builtin gestures).")
@click.option("--per-class", type=int, default=0, help="Gesture samples per class.")
@click.option("--background", type=int, default=None,
              help="Background sample count (default: per-class).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--noise", type=float, default=0.01, show_default=True,
              help="Per-coordinate Gaussian jitter sigma.")
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Output .lmk.jsonl file.")
def synth(words, word_len_min, word_len_max, classes, per_class, background, seed, noise, out):
    """Generate synthetic landmark data (fingerspelling words or a gesture dataset)."""
    if (words > 0) == (per_class > 0):
        raise click.UsageError("choose exactly one mode: --words N or --per-class N")
    gen = GenSpec(seed=seed, noise_sigma=noise)
    if words > 0:
        if not (1 <= word_len_min <= word_len_max):
            raise click.UsageError("need 1 <= --word-len-min <= --word-len-max")
        rng = np.random.default_rng([seed, 0x776F7264])
        letters = [p.name for p in letter_poses()]
        seqs = []
        for i in range(words):
            length = int(rng.integers(word_len_min, word_len_max + 1))
            word = "".join(rng.choice(letters, size=length))
            hand = Handedness.RIGHT if rng.random() < 0.5 else Handedness.LEFT
            seqs.append(gen_fingerspelling(
                word, hand, GenSpec(seed=int(rng.integers(0, 2**63)), noise_sigma=noise,
                                    fps=gen.fps, transition_frames=gen.transition_frames)))
        write_sequences(out, seqs)
        click.echo(f"wrote {len(seqs)} fingerspelling sequences to {out}")
    else:
        names = [c.strip() for c in classes.split(",")] if classes else default_gesture_classes()
        bg = per_class if background is None else background
        data = gen_gesture_dataset(names, per_class, bg, gen)
        seqs = [LandmarkSequence(frames=[frame], label=label) for frame, label in data]
        write_sequences(out, seqs)
        click.echo(f"wrote {len(seqs)} labeled gesture samples ({len(names)} classes "
                   f"+ background) to {out}")


@main.command("pretrain")
@click.option("--data", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--epochs", type=int, default=15, show_default=True)
@click.option("--hidden", type=int, default=64, show_default=True)
@click.option("--lr", type=float, default=1e-3, show_default=True)
@click.option("--batch-size", type=int, default=8, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--holdout", type=int, default=0, show_default=True,
              help="Hold out the last N sequences for a decode-quality report.")
@click.option("--out", type=str, required=True,
              help="Output prefix: writes <out>.fingerspell.gfrg and <out>.embedder.gfrg.")
def pretrain_cmd(data, epochs, hidden, lr, batch_size, seed, holdout, out):
    """Pretrain the fingerspelling model and export its embedding sub-model."""
    seqs = read_sequences(data)
    if holdout >= len(seqs):
        raise click.UsageError("--holdout must leave at least one training sequence")
    train_seqs = seqs[:len(seqs) - holdout] if holdout else seqs
    cfg = PretrainConfig(lr=lr, batch_size=batch_size, epochs=epochs, hidden=hidden, seed=seed)

    def report(stats):
        click.echo(f"epoch {stats.epoch:3d}  loss {stats.mean_loss:8.4f}  "
                   f"cer {stats.label_error_rate:6.3f}  skipped {stats.skipped_infeasible}")

    model, history = pretrain(train_seqs, cfg, progress=report)
    meta = {"epochs": epochs, "hidden": hidden, "lr": lr, "batch_size": batch_size,
            "seed": seed, "train_sequences": len(train_seqs)}
    fs_path = f"{out}.fingerspell.gfrg"
    emb_path = f"{out}.embedder.gfrg"
    save_fingerspell(model, fs_path, metadata=meta)
    save_embedder(export_embedder(model), emb_path, metadata=meta)
    click.echo(f"wrote {fs_path} and {emb_path}")
    if holdout:
        cer = character_error_rate(model, seqs[len(seqs) - holdout:])
        click.echo(f"held-out character error rate over {holdout} sequences: {cer:.3f}")


@main.command()
@click.option("--data", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--embedder", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--regime", type=click.Choice([r.value for r in Regime]), required=True)
@click.option("--k", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--epochs", type=int, default=50, show_default=True)
@click.option("--lr-head", type=float, default=1e-3, show_default=True)
@click.option("--lr-embedder", type=float, default=1e-4, show_default=True)
@click.option("--batch-size", type=int, default=32, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def train(data, embedder, regime, k, seed, epochs, lr_head, lr_embedder, batch_size, out):
    """K-shot train a gesture model from a labeled landmark dataset."""
    samples = samples_from_sequences(read_sequences(data))
    emb_model, _ = _load_embedder_opt(embedder)
    spec = TrainSpec(regime=Regime(regime), k=k, seed=seed, epochs=epochs,
                     lr_head=lr_head, lr_embedder=lr_embedder, batch_size=batch_size)
    try:
        model, report, metadata = run_kshot_training(samples, emb_model, spec)
    except GestureForgeError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}")
    save_model(model, out, metadata=metadata)
    click.echo(f"wrote {out}")
    if report is not None:
        click.echo(json.dumps({
            "sensitivity": report.sensitivity, "specificity": report.specificity,
            "ss_f1": report.ss_f1, "complementary_ss_f1": report.complementary_ss_f1,
            "eval_samples": report.confusion.total}, indent=2))


@main.command()
@click.option("--data", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--embedder", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--ks", type=str, default="10,20,50,100,200,500", show_default=True)
@click.option("--regimes", type=str, default="finetune,frozen,random", show_default=True)
@click.option("--seeds", type=str, default="0,1,2,3,4", show_default=True)
@click.option("--epochs", type=int, default=50, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
def ablate(data, embedder, ks, regimes, seeds, epochs, out_dir):
    """K-sweep ablation across regimes and seeds; writes reports.jsonl + summary.csv."""
    samples = samples_from_sequences(read_sequences(data))
    emb_model, _ = _load_embedder_opt(embedder)
    ks_list = [int(v) for v in ks.split(",")]
    regime_list = [Regime(v.strip()) for v in regimes.split(",")]
    seed_list = [int(v) for v in seeds.split(",")]

    def show(cell):
        status = f"comp_ssf1={cell.report.complementary_ss_f1:.4f}" if cell.report else f"error={cell.error}"
        click.echo(f"K={cell.k:4d} {cell.regime.value:9s} seed={cell.seed}  {status}")

    cells, summary = run_ablation(samples, emb_model, ks=ks_list, regimes=regime_list,
                                  seeds=seed_list, train_overrides={"epochs": epochs},
                                  progress=show)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_reports_jsonl(out / "reports.jsonl", cells)
    write_summary_csv(out / "summary.csv", summary)
    click.echo(f"wrote {out / 'reports.jsonl'} and {out / 'summary.csv'}")
    for row in summary:
        click.echo(f"K={row.k:4d} {row.regime.value:9s} mean_comp_ssf1={row.mean_comp_ssf1:.4f} "
                   f"(n={row.n_seeds}, sd={row.stddev:.4f})")


@main.command()
@click.option("--port", type=int, default=8377, show_default=True)
@click.option("--host", type=str, default="127.0.0.1", show_default=True)
@click.option("--data-dir", type=click.Path(file_okay=False), default=None,
              help="Defaults to $GESTUREFORGE_DATA_DIR or ./gestureforge_data.")
@click.option("--embedder", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Max concurrent training jobs.")
def serve(port, host, data_dir, embedder, jobs):
    """Run the HTTP/WebSocket recognition service."""
    import uvicorn

    from .service.app import create_app

    data_dir = data_dir or os.environ.get("GESTUREFORGE_DATA_DIR", "gestureforge_data")
    token = os.environ.get("GESTUREFORGE_TOKEN") or None
    emb_model, source = _load_embedder_opt(embedder)
    app = create_app(Path(data_dir), embedder=emb_model, embedder_source=source,
                     token=token, workers=jobs)
    click.echo(f"serving on {host}:{port}, data dir {data_dir}, "
               f"auth {'token' if token else 'off'}")
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.command()
@click.option("--model", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--frames", type=int, default=100, show_default=True,
              help="Distinct synthetic frames per repetition.")
@click.option("--reps", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--kernels", "kernels_flag", is_flag=True,
              help="Also compare compiled vs reference kernels.")
def bench(model, frames, reps, seed, kernels_flag):
    """Per-frame inference latency (normalize -> embed -> head), JSON to stdout."""
    from .service.bench import bench_latency

    gmodel = load_model(model)
    data = gen_gesture_dataset(default_gesture_classes(),
                               per_class=max(1, frames // 7), background_count=frames % 7,
                               gen=GenSpec(seed=seed, noise_sigma=0.01))
    frame_list = [f for f, _ in data][:frames] if frames else []
    stats = bench_latency(gmodel, frame_list, reps)
    click.echo(json.dumps(stats.to_dict(), indent=2))
    if kernels_flag:
        from .kernels.benchmark import format_table, kernel_benchmark
        click.echo(format_table(kernel_benchmark()))


if __name__ == "__main__":
    main()
