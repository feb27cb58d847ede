"""End-to-end experiment: per-ticker training, tuning, and evaluation.

For every ticker the series is split chronologically into train, test and
validation windows.  The candle lexicon, embeddings, labels and classifier
are fit on the train window only.  When a hyperparameter grid is supplied,
each combination is trained on the train window and scored by simulated
yield on the test window; the best combination (earliest wins ties) is
frozen before the validation window is ever touched.  Baselines run on the
identical test/validation windows, with indicator warm-up allowed to use
the history before the window.

Tickers are independent and may be processed in parallel; results are
assembled in ticker order so reports do not depend on completion order.
Per-ticker failures are collected, not fatal.
"""

from __future__ import annotations

import csv
import dataclasses
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .backtest import StrategyRun, YieldReport, buy_and_hold, ma_crossover, macd, simulate
from .classifier import (
    ContextParams,
    SoftmaxModel,
    build_context_features,
    predict_many,
    train_softmax,
)
from .corpus import build_sentences
from .embedding import EmbeddingConfig, EmbeddingMatrix, train_embeddings
from .labeler import ActionLabel, LabelingParams, label_days
from .lexicon import Codebook, assign_words, fit_codebook
from .market_data import NormalizedBar, OhlcBar, load_series, normalize
from .stats import StatsError, mean_yield, wilcoxon_signed_rank

STRATEGIES = ("buy_hold", "ma", "macd", "w2v")
PHASES = ("test", "validation")

# Hyperparameters a tuning grid may range over.
GRID_KEYS = (
    "n_w", "l_s", "n_v", "n_ww", "n_m", "n_la",
    "embed_epochs", "embed_learning_rate",
    "softmax_epochs", "softmax_learning_rate", "l2_lambda",
)


class PipelineError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """Batch-experiment settings; JSON files mirror these field names."""

    tickers: list[str]
    data_dir: str
    split: tuple[float, float, float] = (0.6, 0.2, 0.2)
    n_w: int = 20
    l_s: int = 5
    n_v: int = 10
    n_ww: int = 2
    n_m: int = 2
    n_la: int = 5
    v_fee: float = 10.0
    e: float = 10000.0
    seed: int = 0
    embed_epochs: int = 50
    embed_learning_rate: float = 0.025
    softmax_epochs: int = 500
    softmax_learning_rate: float = 0.1
    l2_lambda: float = 1e-3
    grid: dict[str, list] | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "tickers", list(self.tickers))
        object.__setattr__(self, "split", tuple(float(f) for f in self.split))
        if not self.tickers:
            raise PipelineError("no tickers configured")
        if len(self.split) != 3 or any(f <= 0 for f in self.split):
            raise PipelineError("split needs three positive fractions")
        if abs(sum(self.split) - 1.0) > 1e-9:
            raise PipelineError(f"split fractions sum to {sum(self.split)}, not 1")
        if min(self.n_w, self.l_s, self.n_v, self.n_ww, self.n_la) < 1:
            raise PipelineError("n_w, l_s, n_v, n_ww, n_la must all be >= 1")
        if self.n_m < 0:
            raise PipelineError("n_m must be >= 0")
        if self.v_fee < 0 or self.e <= 0:
            raise PipelineError("need v_fee >= 0 and e > 0")
        if min(self.embed_epochs, self.softmax_epochs) < 1:
            raise PipelineError("epoch counts must be >= 1")
        if min(self.embed_learning_rate, self.softmax_learning_rate) <= 0:
            raise PipelineError("learning rates must be positive")
        if self.l2_lambda < 0:
            raise PipelineError("l2_lambda must be >= 0")
        if self.workers < 1:
            raise PipelineError("workers must be >= 1")
        if self.grid is not None:
            for key, values in self.grid.items():
                if key not in GRID_KEYS:
                    raise PipelineError(
                        f"grid key {key!r} is not tunable (allowed: {', '.join(GRID_KEYS)})")
                if not values:
                    raise PipelineError(f"grid key {key!r} has no values")

    def to_json(self) -> str:
        obj = dataclasses.asdict(self)
        obj["split"] = list(self.split)
        return json.dumps(obj, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PipelineError(f"bad config JSON: {exc}") from None
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise PipelineError(f"unknown config fields: {', '.join(sorted(unknown))}")
        if "tickers" not in obj or "data_dir" not in obj:
            raise PipelineError("config requires tickers and data_dir")
        return cls(**obj)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class TickerModels:
    """Everything fitted on one ticker's train window."""

    codebook: Codebook
    embeddings: EmbeddingMatrix
    classifier: SoftmaxModel
    params: dict


@dataclass(frozen=True)
class PhaseReport:
    """All per-ticker yields plus aggregate statistics for one experiment."""

    yields: list[YieldReport]
    means: dict[tuple[str, str], float]
    wilcoxon: list[dict]
    tuned: dict[str, dict]
    failures: list[tuple[str, str]]
    config: ExperimentConfig


def split_bounds(n_days: int, split: tuple[float, float, float]) -> tuple[tuple[int, int], tuple[int, int], tuple[int, int]]:
    """Day-aligned chronological split; the three windows partition [0, n)."""
    n_train = int(n_days * split[0])
    n_test = int(n_days * split[1])
    return (0, n_train), (n_train, n_train + n_test), (n_train + n_test, n_days)


def hyperparams(config: ExperimentConfig) -> dict:
    return {key: getattr(config, key) for key in GRID_KEYS}


def grid_combinations(grid: dict[str, list]) -> list[dict]:
    """Cartesian product of the grid in declaration order."""
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def fit_ticker_models(bars: Sequence[OhlcBar], train_stop: int, params: dict,
                      v_fee: float, e: float, seed: int) -> TickerModels:
    """Fit lexicon, embeddings and classifier on bars[:train_stop] only."""
    train_bars = [normalize(b) for b in bars[:train_stop]]
    closes = [b.close for b in bars[:train_stop]]
    codebook = fit_codebook(train_bars, n_w=params["n_w"], seed=seed)
    words = assign_words(train_bars, codebook)
    sentences = build_sentences(words, l_s=params["l_s"])
    embeddings = train_embeddings(
        sentences, params["n_w"],
        EmbeddingConfig(n_v=params["n_v"], n_ww=params["n_ww"],
                        epochs=params["embed_epochs"],
                        learning_rate=params["embed_learning_rate"],
                        seed=seed))
    labels = label_days(closes, LabelingParams(n_la=params["n_la"], v_fee=v_fee, e=e))
    features = build_context_features(words, embeddings, labels,
                                      ContextParams(n_m=params["n_m"]))
    model = train_softmax(features, l2_lambda=params["l2_lambda"],
                          epochs=params["softmax_epochs"],
                          learning_rate=params["softmax_learning_rate"],
                          seed=seed)
    return TickerModels(codebook=codebook, embeddings=embeddings,
                        classifier=model, params=dict(params))


def w2v_actions(models: TickerModels, norm_bars: Sequence[NormalizedBar],
                start: int, stop: int) -> list[ActionLabel]:
    """Predicted actions for days [start, stop), using history up to each day.

    Words are assigned with the train-fitted codebook; each day's feature
    sums the embedding vectors of the day and its n_m predecessors.  Days
    with fewer than n_m predecessors (only possible at the very start of a
    series) fall back to HOLD.
    """
    n_m = models.params["n_m"]
    words = assign_words(norm_bars[:stop], models.codebook)
    vectors = models.embeddings.rows[np.asarray(words, dtype=int)]
    days = [t for t in range(start, stop) if t >= n_m]
    actions = [ActionLabel.HOLD] * (stop - start)
    if days:
        rows = np.stack([vectors[t - n_m:t + 1].sum(axis=0) for t in days])
        for t, action in zip(days, predict_many(models.classifier, rows)):
            actions[t - start] = action
    return actions


def phase_yield(closes: Sequence[float], actions: Sequence[ActionLabel],
                e: float, v_fee: float) -> float:
    ledger = simulate(closes, StrategyRun(actions=actions, e=e, v_fee=v_fee))
    return ledger.yield_


def evaluate_ticker(ticker: str, csv_path: str | Path,
                    config: ExperimentConfig) -> tuple[list[YieldReport], dict]:
    """Train (with optional grid tuning) and score all strategies on both
    evaluation phases for one ticker.  Returns (yield reports, tuned params)."""
    bars = load_series(csv_path)
    n = len(bars)
    (_, train_stop), (test_start, test_stop), (val_start, val_stop) = \
        split_bounds(n, config.split)
    if train_stop < 2 or test_stop <= test_start or val_stop <= val_start:
        raise PipelineError(f"{ticker}: series of {n} days leaves an empty phase")

    closes = [b.close for b in bars]
    norm_bars = [normalize(b) for b in bars]

    base = hyperparams(config)
    combos = grid_combinations(config.grid) if config.grid else [{}]
    best: tuple[float, dict, TickerModels] | None = None
    for combo in combos:
        params = base | combo
        models = fit_ticker_models(bars, train_stop, params, config.v_fee,
                                   config.e, config.seed)
        actions = w2v_actions(models, norm_bars, test_start, test_stop)
        test_yield = phase_yield(closes[test_start:test_stop], actions,
                                 config.e, config.v_fee)
        if best is None or test_yield > best[0]:
            best = (test_yield, params, models)
    assert best is not None
    w2v_test, params, models = best

    reports = []
    for phase, start, stop in (("test", test_start, test_stop),
                               ("validation", val_start, val_stop)):
        window = closes[start:stop]
        reports.append(buy_and_hold(window, config.e, config.v_fee,
                                    ticker=ticker, phase=phase))
        for name, stream in (("ma", ma_crossover(closes[:stop])),
                             ("macd", macd(closes[:stop]))):
            reports.append(YieldReport(
                ticker=ticker, strategy=name, phase=phase,
                yield_=phase_yield(window, stream[start:stop],
                                   config.e, config.v_fee)))
        if phase == "test":
            w2v = w2v_test
        else:
            actions = w2v_actions(models, norm_bars, start, stop)
            w2v = phase_yield(window, actions, config.e, config.v_fee)
        reports.append(YieldReport(ticker=ticker, strategy="w2v", phase=phase,
                                   yield_=w2v))
    order = {name: i for i, name in enumerate(STRATEGIES)}
    reports.sort(key=lambda r: (PHASES.index(r.phase), order[r.strategy]))
    return reports, params


def _evaluate_one(args: tuple[str, str, ExperimentConfig]):
    ticker, path, config = args
    try:
        return ticker, evaluate_ticker(ticker, path, config), None
    except Exception as exc:  # noqa: BLE001 - per-ticker isolation
        return ticker, None, f"{type(exc).__name__}: {exc}"


def run_experiment(config: ExperimentConfig) -> PhaseReport:
    """Run the full batch over all configured tickers."""
    data_dir = Path(config.data_dir)
    if not data_dir.is_dir():
        raise PipelineError(f"data directory not found: {data_dir}")
    tickers = sorted(set(config.tickers))
    jobs = [(t, str(data_dir / f"{t}.csv"), config) for t in tickers]
    for ticker, path, _ in jobs:
        if not Path(path).is_file():
            raise PipelineError(f"no data file for ticker {ticker}: {path}")

    results: dict[str, tuple[list[YieldReport], dict]] = {}
    failures: list[tuple[str, str]] = []
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(_evaluate_one, jobs))
    else:
        outcomes = [_evaluate_one(job) for job in jobs]
    for ticker, outcome, error in outcomes:
        if error is None:
            results[ticker] = outcome
        else:
            failures.append((ticker, error))

    yields: list[YieldReport] = []
    tuned: dict[str, dict] = {}
    for ticker in tickers:
        if ticker in results:
            reports, params = results[ticker]
            yields.extend(reports)
            tuned[ticker] = params

    means: dict[tuple[str, str], float] = {}
    for strategy in STRATEGIES:
        for phase in PHASES:
            cell = [r for r in yields if r.strategy == strategy and r.phase == phase]
            if cell:
                means[(strategy, phase)] = mean_yield(cell)

    wilcoxon_rows: list[dict] = []
    ok_tickers = [t for t in tickers if t in results]
    if len(ok_tickers) >= 6:
        by_key = {(r.ticker, r.strategy, r.phase): r.yield_ for r in yields}
        for phase in PHASES:
            w2v = [by_key[(t, "w2v", phase)] for t in ok_tickers]
            for baseline in ("buy_hold", "ma", "macd"):
                other = [by_key[(t, baseline, phase)] for t in ok_tickers]
                try:
                    res = wilcoxon_signed_rank(w2v, other)
                except StatsError:
                    continue  # degenerate (e.g. identical yields everywhere)
                wilcoxon_rows.append({
                    "comparison": f"{phase}:w2v_vs_{baseline}",
                    "W": res.w_statistic,
                    "N": res.n_effective,
                    "z": res.z_score,
                    "p_one_tailed": res.p_value,
                    "p_two_tailed": res.p_two_tailed,
                    "median_diff": res.median_diff,
                })

    return PhaseReport(yields=yields, means=means, wilcoxon=wilcoxon_rows,
                       tuned=tuned, failures=failures, config=config)


def emit_report(report: PhaseReport, out_dir: str | Path) -> list[Path]:
    """Write the report as CSVs, the resolved config, and summary figures.

    Output is byte-stable across reruns with the same inputs.  Returns the
    written paths.
    """
    from .figures import render_mean_yields  # defers the matplotlib import

    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []

        path = out / "yields.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["ticker", "strategy", "phase", "yield"])
            order = {name: i for i, name in enumerate(STRATEGIES)}
            for r in sorted(report.yields,
                            key=lambda r: (r.ticker, PHASES.index(r.phase), order[r.strategy])):
                writer.writerow([r.ticker, r.strategy, r.phase, f"{r.yield_:.2f}"])
        written.append(path)

        path = out / "summary.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["strategy", "phase", "mean_yield"])
            for strategy in STRATEGIES:
                for phase in PHASES:
                    if (strategy, phase) in report.means:
                        writer.writerow([strategy, phase,
                                         f"{report.means[(strategy, phase)]:.2f}"])
        written.append(path)

        path = out / "wilcoxon.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["comparison", "W", "N", "z",
                             "p_one_tailed", "p_two_tailed", "median_diff"])
            for row in report.wilcoxon:
                writer.writerow([row["comparison"], repr(row["W"]), row["N"],
                                 repr(row["z"]), repr(row["p_one_tailed"]),
                                 repr(row["p_two_tailed"]), f"{row['median_diff']:.2f}"])
        written.append(path)

        path = out / "tuned_params.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["ticker", *GRID_KEYS])
            for ticker in sorted(report.tuned):
                params = report.tuned[ticker]
                writer.writerow([ticker, *(repr(params[k]) if isinstance(params[k], float)
                                           else params[k] for k in GRID_KEYS)])
        written.append(path)

        path = out / "failures.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["ticker", "error"])
            for ticker, error in sorted(report.failures):
                writer.writerow([ticker, error])
        written.append(path)

        path = out / "config.json"
        path.write_text(report.config.to_json() + "\n", encoding="utf-8")
        written.append(path)

        path = out / "mean_yields.png"
        render_mean_yields(report.means, path)
        written.append(path)
        return written
    except OSError as exc:
        raise PipelineError(f"cannot write report to {out}: {exc}") from None
