"""Batch CLI: train, evaluate, sweep-nw, and label subcommands.

Exit codes: 0 on full success, 1 when some tickers failed but the batch
completed, 2 on configuration or data errors.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .backtest import BacktestError
from .classifier import ClassifierError
from .corpus import CorpusError
from .embedding import EmbeddingConfig, EmbeddingError
from .labeler import LabelerError, LabelingParams, export_labels, label_days
from .lexicon import LexiconError, sweep_vocab_sizes
from .market_data import MarketDataError, load_series, normalize
from .pipeline import (
    ExperimentConfig,
    PipelineError,
    emit_report,
    fit_ticker_models,
    hyperparams,
    run_experiment,
    split_bounds,
)

_CONFIG_ERRORS = (PipelineError, MarketDataError, LexiconError, CorpusError,
                  EmbeddingError, LabelerError, ClassifierError, BacktestError,
                  OSError)


class ConfigDataError(click.ClickException):
    """Configuration or data problem; exits with status 2."""

    exit_code = 2


def _load_config(path: str) -> ExperimentConfig:
    try:
        return ExperimentConfig.load(path)
    except FileNotFoundError:
        raise ConfigDataError(f"config file not found: {path}")
    except PipelineError as exc:
        raise ConfigDataError(str(exc))


@click.group()
def main() -> None:
    """Candle-word forecasting experiments over daily OHLC files."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(),
              help="Experiment config JSON.")
@click.option("--out", "out_dir", default="artifacts", show_default=True,
              type=click.Path(), help="Directory for per-ticker model files.")
def train(config_path: str, out_dir: str) -> None:
    """Fit codebook, embeddings and classifier per ticker; save artifacts."""
    config = _load_config(config_path)
    out = Path(out_dir)
    failures = 0
    for ticker in sorted(set(config.tickers)):
        try:
            bars = load_series(Path(config.data_dir) / f"{ticker}.csv")
            (_, train_stop), _, _ = split_bounds(len(bars), config.split)
            models = fit_ticker_models(bars, train_stop, hyperparams(config),
                                       config.v_fee, config.e, config.seed)
            ticker_dir = out / ticker
            ticker_dir.mkdir(parents=True, exist_ok=True)
            models.codebook.save(ticker_dir / "codebook.json")
            models.embeddings.save(
                ticker_dir / "embeddings.json",
                EmbeddingConfig(n_v=config.n_v, n_ww=config.n_ww,
                                epochs=config.embed_epochs,
                                learning_rate=config.embed_learning_rate,
                                seed=config.seed))
            models.classifier.save(ticker_dir / "model.json")
            click.echo(f"{ticker}: trained on {train_stop} days -> {ticker_dir}")
        except _CONFIG_ERRORS as exc:
            failures += 1
            click.echo(f"{ticker}: FAILED ({exc})", err=True)
    sys.exit(1 if failures else 0)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(),
              help="Experiment config JSON.")
@click.option("--out", "out_dir", required=True, type=click.Path(),
              help="Report output directory.")
def evaluate(config_path: str, out_dir: str) -> None:
    """Run the full experiment and write yield/Wilcoxon reports."""
    config = _load_config(config_path)
    try:
        report = run_experiment(config)
        written = emit_report(report, out_dir)
    except _CONFIG_ERRORS as exc:
        raise ConfigDataError(str(exc))
    for (strategy, phase), value in sorted(report.means.items()):
        click.echo(f"mean yield {strategy:>9} [{phase}]: ${value:,.2f}")
    for row in report.wilcoxon:
        click.echo(f"wilcoxon {row['comparison']}: W={row['W']:g} "
                   f"N={row['N']} p={row['p_one_tailed']:.4g}")
    for ticker, error in report.failures:
        click.echo(f"{ticker}: FAILED ({error})", err=True)
    click.echo(f"wrote {len(written)} files to {out_dir}")
    sys.exit(1 if report.failures else 0)


@main.command("sweep-nw")
@click.option("--ticker", required=True, help="Ticker symbol (filename stem).")
@click.option("--min", "k_min", required=True, type=int, help="Smallest n_w.")
@click.option("--max", "k_max", required=True, type=int, help="Largest n_w.")
@click.option("--data-dir", default=".", show_default=True, type=click.Path())
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_dir", default=None, type=click.Path(),
              help="Also write sweep CSV and figure here.")
def sweep_nw(ticker: str, k_min: int, k_max: int, data_dir: str, seed: int,
             out_dir: str | None) -> None:
    """Silhouette scores over a vocabulary-size range, for choosing n_w."""
    try:
        bars = load_series(Path(data_dir) / f"{ticker}.csv")
        pairs = sweep_vocab_sizes([normalize(b) for b in bars], k_min, k_max,
                                  seed=seed)
    except _CONFIG_ERRORS as exc:
        raise ConfigDataError(str(exc))
    click.echo("n_w,silhouette")
    for k, score in pairs:
        click.echo(f"{k},{score:.6f}")
    best_k, best_score = max(pairs, key=lambda p: p[1])
    click.echo(f"# best n_w = {best_k} (silhouette {best_score:.6f})")
    if out_dir is not None:
        from .figures import render_silhouette_sweep  # defers matplotlib
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"sweep_{ticker}.csv"
        csv_path.write_text(
            "n_w,silhouette\n" +
            "".join(f"{k},{score:.6f}\n" for k, score in pairs),
            encoding="utf-8")
        render_silhouette_sweep(pairs, out / f"sweep_{ticker}.png")
        click.echo(f"# wrote {csv_path} and {out / f'sweep_{ticker}.png'}")


@main.command()
@click.option("--ticker", required=True, help="Ticker symbol (filename stem).")
@click.option("--data-dir", default=".", show_default=True, type=click.Path())
@click.option("--n-la", default=5, show_default=True, type=int,
              help="Look-ahead horizon in trading days.")
@click.option("--v-fee", default=10.0, show_default=True, type=float,
              help="Flat fee per transaction.")
@click.option("--e", default=10000.0, show_default=True, type=float,
              help="Initial equity for share sizing.")
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Output CSV (defaults to stdout).")
def label(ticker: str, data_dir: str, n_la: int, v_fee: float, e: float,
          out_path: str | None) -> None:
    """Export look-ahead BUY/SELL/HOLD labels as date,label CSV."""
    try:
        bars = load_series(Path(data_dir) / f"{ticker}.csv")
        labels = label_days([b.close for b in bars],
                            LabelingParams(n_la=n_la, v_fee=v_fee, e=e))
    except _CONFIG_ERRORS as exc:
        raise ConfigDataError(str(exc))
    if out_path is None:
        click.echo("date,label")
        for bar, lab in zip(bars, labels):
            click.echo(f"{bar.date.isoformat()},{lab.name}")
    else:
        export_labels(out_path, [b.date for b in bars], labels)
        click.echo(f"wrote {len(labels)} labels to {out_path}")


if __name__ == "__main__":
    main()
