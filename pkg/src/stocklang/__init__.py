"""stocklang: a candle-word language pipeline for stock-trend forecasting.

Daily OHLC bars are normalized to candle shapes, clustered into a finite
word lexicon, embedded with a skip-gram model, labeled with fee-aware
look-ahead trading actions, classified with a regularized softmax over
summed context vectors, and evaluated by simulated trading yield against
Buy & Hold, MA crossover, and MACD baselines with Wilcoxon signed-rank
significance tests.
"""

from .market_data import MarketDataError, NormalizedBar, OhlcBar, load_series, normalize, write_series
from .lexicon import Codebook, LexiconError, assign_word, assign_words, fit_codebook, silhouette_score, sweep_vocab_sizes
from .corpus import CorpusError, SentenceMatrix, build_sentences
from .embedding import (
    EmbeddingConfig,
    EmbeddingError,
    EmbeddingMatrix,
    SkipGramModel,
    context_pairs,
    cosine_similarity,
    fit_skipgram,
    skipgram_gradients,
    skipgram_loss,
    train_embeddings,
    vector_arithmetic_probe,
)
from .labeler import ActionLabel, LabelerError, LabelingParams, export_labels, label_days, max_shares
from .classifier import (
    ClassifierError,
    ContextParams,
    FeatureMatrix,
    SoftmaxModel,
    build_basic_features,
    build_context_features,
    predict,
    predict_many,
    softmax_gradients,
    softmax_loss,
    train_softmax,
)
from .backtest import (
    BacktestError,
    StrategyRun,
    Trade,
    TradeLedger,
    YieldReport,
    buy_and_hold,
    export_ledger,
    ma_crossover,
    macd,
    simulate,
)
from .stats import StatsError, WilcoxonResult, mean_yield, wilcoxon_signed_rank
from .pipeline import (
    ExperimentConfig,
    PhaseReport,
    PipelineError,
    TickerModels,
    emit_report,
    evaluate_ticker,
    fit_ticker_models,
    run_experiment,
    split_bounds,
    w2v_actions,
)

__version__ = "0.1.0"
