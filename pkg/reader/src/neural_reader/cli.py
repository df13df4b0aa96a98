"""neural-reader command line: serve the wire protocol, train from
manifests, and build offline tiny models for smoke testing."""

import sys
from pathlib import Path

import click

from .modeling import build_tiny_model, load
from .server import ServeOptions, serve_stdio, serve_tcp
from .training import TrainerConfig, TrainingDataError, train


@click.group()
def cli():
    """Span-extraction reader over newline-delimited JSON."""


@cli.command("serve")
@click.option("--model", "model_dir", required=True)
@click.option("--stdio", "transport", flag_value="stdio", default=True)
@click.option("--tcp", "port", type=int, default=None, help="listen on 127.0.0.1:PORT instead of stdio")
@click.option("--once", is_flag=True, help="with --tcp: exit after the first connection closes")
@click.option("--max-seq", type=int, default=384, show_default=True)
@click.option("--stride", type=int, default=128, show_default=True)
@click.option("--max-answer-tokens", type=int, default=30, show_default=True)
@click.option("--allow-no-answer", is_flag=True)
def serve_cmd(model_dir, transport, port, once, max_seq, stride, max_answer_tokens, allow_no_answer):
    """Answer protocol requests with the best span per paragraph."""
    model, tokenizer = load(model_dir)
    options = ServeOptions(
        max_length=max_seq,
        stride=stride,
        max_answer_tokens=max_answer_tokens,
        allow_no_answer=allow_no_answer,
    )
    if port is not None:
        serve_tcp(model, tokenizer, options, port, once=once)
    else:
        serve_stdio(model, tokenizer, options)


@cli.command("train")
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--base-model", required=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--epochs", type=int, default=2, show_default=True)
@click.option("--lr", type=float, default=3e-5, show_default=True)
@click.option("--batch-size", type=int, default=8, show_default=True)
@click.option("--seed", type=int, default=13, show_default=True)
@click.option("--max-seq", type=int, default=384, show_default=True)
@click.option("--negative-target", type=click.Choice(["null_span", "skip"]), default="null_span", show_default=True)
def train_cmd(manifest, base_model, out_dir, epochs, lr, batch_size, seed, max_seq, negative_target):
    """Fine-tune stage by stage in manifest order."""
    config = TrainerConfig(
        base_model=base_model,
        max_sequence_tokens=max_seq,
        learning_rate=lr,
        epochs_per_stage=epochs,
        negative_target=negative_target,
        batch_size=batch_size,
        seed=seed,
    )
    log = train(manifest, config, out_dir)
    click.echo(f"trained {len(log['stages'])} stage(s); log at {Path(out_dir) / 'training_log.json'}")


@cli.command("init-tiny")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--from-text", "text_files", multiple=True, type=click.Path(exists=True, dir_okay=False),
              help="files whose words form the vocabulary (plain text or JSONL)")
@click.option("--hidden", type=int, default=64, show_default=True)
@click.option("--layers", type=int, default=2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def init_tiny_cmd(out_dir, text_files, hidden, layers, seed):
    """Build a randomly initialized miniature model for offline smoke runs."""
    texts = [Path(p).read_text(encoding="utf-8") for p in text_files] or ["placeholder vocabulary"]
    build_tiny_model(out_dir, texts, hidden_size=hidden, num_layers=layers, seed=seed)
    click.echo(f"tiny model written to {out_dir}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except (TrainingDataError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
