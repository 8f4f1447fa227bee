"""Multi-agent experiment engine: schedules, prediction rounds, metrics.

A simulation step has two phases: a prediction phase in which every agent
issues a joint prediction against immutable model snapshots, and an ingest
phase in which exactly one agent's model mutates. Determinism is guaranteed
by seeding: reruns with the same config produce identical records apart
from wall-clock timings.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .aggregation import AggregationPlan, MethodSpec, joint_predict
from .bounds import BoundParams, eta_bound, tilde_eta
from .errors import InvalidInputError, MetricError
from .graph import Graph, fully_connected
from .kernels import KernelConfig
from .memory import ingest
from .model import AgentModel

TOY_INTERVAL = (-1.2, 1.2)
TOY_NOISE_STD = 0.5  # noise variance 0.25

SCHEDULE_MODES = ("cyclic", "round-robin")


def toy_mean(x):
    """Noiseless part of the benchmark toy function."""
    x = np.asarray(x, dtype=float)
    return (
        5.0 * x**2 * np.sin(12.0 * x)
        + (x**3 - 0.5) * np.sin(3.0 * x - 0.5)
        + 4.0 * np.cos(2.0 * x)
    )


def toy_function(x, rng: np.random.Generator):
    """Toy observation: the deterministic mean plus N(0, 0.25) noise."""
    x = np.asarray(x, dtype=float)
    return toy_mean(x) + rng.normal(0.0, TOY_NOISE_STD, size=x.shape)


def smse(predictions, truths) -> float:
    """Mean squared error divided by the population variance of the targets."""
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(truths, dtype=float)
    if p.shape != t.shape:
        raise InvalidInputError("predictions and truths must have equal shapes")
    if t.size < 2:
        raise MetricError("smse needs at least two targets")
    var = float(np.var(t))
    if var == 0.0:
        raise MetricError("smse undefined for zero target variance")
    return float(np.mean((p - t) ** 2)) / var


@dataclass(frozen=True)
class StreamSchedule:
    """Which agent ingests the point arriving at each step.

    ``cyclic`` fills agent 1 up to the capacity threshold, then agent 2 and
    so on, wrapping back to agent 1; ``round-robin`` alternates every step.
    """

    mode: str = "cyclic"
    capacity: int = 100

    def __post_init__(self):
        if self.mode not in SCHEDULE_MODES:
            raise InvalidInputError(f"unknown schedule mode {self.mode!r}")
        if self.capacity < 1:
            raise InvalidInputError("capacity must be at least 1")

    def recipient(self, step: int, n_agents: int) -> int:
        if self.mode == "cyclic":
            return 1 + (step // self.capacity) % n_agents
        return 1 + step % n_agents


@dataclass
class SimRecord:
    """Per-iteration metrics of one simulation step."""

    iteration: int
    query: np.ndarray
    truth: np.ndarray
    predictions: dict[int, np.ndarray]
    selected_sizes: dict[int, int]
    active_agents: int
    prediction_time: float
    smse_cum: float
    smse_window: float
    hat_eta: dict[int, float] | None = None


@dataclass
class SimResult:
    """Record stream plus run-level bookkeeping."""

    records: list[SimRecord]
    method: MethodSpec
    n_agents: int
    deletions: dict[int, int] = field(default_factory=dict)
    final_sizes: dict[int, int] = field(default_factory=dict)

    def mean_abs_error(self) -> float:
        errs = [
            np.linalg.norm(pred - rec.truth)
            for rec in self.records
            for pred in rec.predictions.values()
        ]
        return float(np.mean(errs))

    def summary(self) -> dict:
        times_ms = [r.prediction_time * 1e3 for r in self.records]
        return {
            "iterations": len(self.records),
            "agents": self.n_agents,
            "method": self.method.name,
            "final_smse": self.records[-1].smse_cum if self.records else math.nan,
            "window_smse": self.records[-1].smse_window if self.records else math.nan,
            "mean_abs_error": self.mean_abs_error(),
            "mean_prediction_time_ms": float(np.mean(times_ms)) if times_ms else 0.0,
            "median_prediction_time_ms": float(np.median(times_ms)) if times_ms else 0.0,
            "mean_active_agents": float(np.mean([r.active_agents for r in self.records]))
            if self.records
            else 0.0,
            "total_deletions": int(sum(self.deletions.values())),
        }


class _RunningSmse:
    """Cumulative and windowed SMSE over pooled per-agent predictions."""

    def __init__(self, window: int):
        self.window = window
        self._sq_err = 0.0
        self._err_count = 0
        self._t_sum = 0.0
        self._t_sq_sum = 0.0
        self._t_count = 0
        self._history: list[tuple[np.ndarray, np.ndarray]] = []

    def update(self, predictions: dict[int, np.ndarray], truth: np.ndarray):
        for pred in predictions.values():
            self._sq_err += float(np.sum((pred - truth) ** 2))
            self._err_count += truth.size
        self._t_sum += float(np.sum(truth))
        self._t_sq_sum += float(np.sum(truth**2))
        self._t_count += truth.size
        preds = np.stack(list(predictions.values()))
        self._history.append((preds, truth))

    def cumulative(self) -> float:
        if self._t_count < 2:
            return math.nan
        var = self._t_sq_sum / self._t_count - (self._t_sum / self._t_count) ** 2
        if var <= 0.0:
            return math.nan
        return (self._sq_err / self._err_count) / var

    def windowed(self) -> float:
        tail = self._history[-self.window :]
        if len(tail) < 2:
            return math.nan
        truths = np.stack([t for _, t in tail])
        var = float(np.var(truths))
        if var <= 0.0:
            return math.nan
        mse = float(np.mean([np.mean((p - t) ** 2) for p, t in tail]))
        return mse / var


def predict_round(
    models: dict[int, AgentModel],
    graph: Graph,
    x,
    method: MethodSpec,
    cfg: KernelConfig,
    collect_diagnostics: bool = False,
) -> tuple[dict[int, np.ndarray], dict[int, AggregationPlan], float]:
    """All agents' joint predictions at one query, with wall-clock timing."""
    preds: dict[int, np.ndarray] = {}
    plans: dict[int, AggregationPlan] = {}
    start = time.perf_counter()
    for i in graph.nodes:
        preds[i], plans[i] = joint_predict(
            i, x, models, graph, method, cfg, collect_diagnostics
        )
    elapsed = time.perf_counter() - start
    return preds, plans, elapsed


def _round_bounds(
    plans: dict[int, AggregationPlan],
    bounds: BoundParams,
    models: dict[int, AgentModel],
    method: MethodSpec,
) -> dict[int, float] | None:
    """Per-agent aggregated error bounds from the round's diagnostics."""
    if any(plans[i].scores is None for i in plans):
        return None
    hat: dict[int, float] = {}
    for i, plan in plans.items():
        if plan.degenerate:
            hat[i] = math.inf
            continue
        total = 0.0
        for s in plan.selected:
            score = plan.scores[s]
            eta = eta_bound(models[s], score.idx, bounds.beta)
            # scores may have been computed at the selection-mode lam
            eps = score.epsilon * (method.lam / bounds.lam)
            total += float(plan.weights[s][0]) * tilde_eta(eta, eps, plan.approx_means[s])
        hat[i] = total
    return hat


def _record_step(
    k, x, truth, preds, plans, elapsed, tracker, bounds, models, method
) -> SimRecord:
    truth = np.atleast_1d(np.asarray(truth, dtype=float))
    tracker.update(preds, truth)
    sizes = {i: len(plans[i].selected) for i in plans}
    hat = None
    if bounds is not None and not method.is_baseline:
        hat = _round_bounds(plans, bounds, models, method)
    return SimRecord(
        iteration=k,
        query=np.atleast_1d(np.asarray(x, dtype=float)),
        truth=truth,
        predictions=preds,
        selected_sizes=sizes,
        active_agents=sum(sizes.values()),
        prediction_time=elapsed,
        smse_cum=tracker.cumulative(),
        smse_window=tracker.windowed(),
        hat_eta=hat,
    )


def toy_training_data(train_points: int, n_agents: int, rng: np.random.Generator):
    """Evenly spaced toy inputs with noisy outputs, split into contiguous blocks."""
    xs = np.linspace(*TOY_INTERVAL, train_points)
    ys = toy_function(xs, rng)
    blocks = np.array_split(np.arange(train_points), n_agents)
    return xs, ys, blocks


def run_offline_toy(
    cfg: KernelConfig,
    method: MethodSpec,
    n_agents: int = 4,
    train_points: int = 400,
    query_points: int = 100,
    seed: int = 0,
    bounds: BoundParams | None = None,
    window: int = 100,
) -> SimResult:
    """Static-dataset toy experiment on a fully connected graph.

    The training interval is divided into contiguous equal blocks, one per
    agent; every query point triggers a joint prediction at every agent.
    Truths are the noiseless toy mean.
    """
    if cfg.input_dim != 1 or cfg.output_dim != 1:
        raise InvalidInputError("the toy experiment is one-dimensional")
    rng = np.random.default_rng(seed)
    xs, ys, blocks = toy_training_data(train_points, n_agents, rng)
    models = {
        i + 1: AgentModel.from_data(cfg, xs[b][:, None], ys[b][:, None])
        for i, b in enumerate(blocks)
    }
    graph = fully_connected(n_agents)
    queries = np.linspace(*TOY_INTERVAL, query_points)
    truths = toy_mean(queries)

    tracker = _RunningSmse(window)
    collect = bounds is not None and not method.is_baseline
    records = []
    for k in range(query_points):
        preds, plans, elapsed = predict_round(
            models, graph, [queries[k]], method, cfg, collect
        )
        records.append(
            _record_step(
                k, [queries[k]], [truths[k]], preds, plans, elapsed,
                tracker, bounds, models, method,
            )
        )
    return SimResult(
        records=records,
        method=method,
        n_agents=n_agents,
        final_sizes={i: models[i].n for i in models},
    )


def run_online(
    cfg: KernelConfig,
    method: MethodSpec,
    graph: Graph,
    stream_X: np.ndarray,
    stream_Y: np.ndarray,
    schedule: StreamSchedule,
    bounds: BoundParams | None = None,
    window: int = 100,
) -> SimResult:
    """Streaming experiment: predict at each incoming point, then ingest it.

    At step k every agent predicts at the incoming input using only data
    ingested strictly before step k; the scheduled recipient then ingests
    the pair and refreshes its error cache.
    """
    stream_X = np.asarray(stream_X, dtype=float).reshape(-1, cfg.input_dim)
    stream_Y = np.asarray(stream_Y, dtype=float).reshape(-1, cfg.output_dim)
    if stream_X.shape[0] != stream_Y.shape[0]:
        raise InvalidInputError("stream inputs and outputs must align")
    models = {i: AgentModel(cfg) for i in graph.nodes}
    deletions = {i: 0 for i in graph.nodes}
    tracker = _RunningSmse(window)
    collect = bounds is not None and not method.is_baseline
    records = []
    for k in range(stream_X.shape[0]):
        x, y = stream_X[k], stream_Y[k]
        preds, plans, elapsed = predict_round(models, graph, x, method, cfg, collect)
        records.append(
            _record_step(k, x, y, preds, plans, elapsed, tracker, bounds, models, method)
        )
        recipient = schedule.recipient(k, graph.n)
        report = ingest(models[recipient], x, y, schedule.capacity)
        if report.deleted_index is not None:
            deletions[recipient] += 1
    return SimResult(
        records=records,
        method=method,
        n_agents=graph.n,
        deletions=deletions,
        final_sizes={i: models[i].n for i in models},
    )
