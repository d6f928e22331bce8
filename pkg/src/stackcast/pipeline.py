"""End-to-end experiment orchestration from a declarative YAML config.

Stages run in a fixed order (ingest -> features -> cv -> train -> stack ->
evaluate -> importance -> report), each reading its inputs from the output
directory and writing its artifacts back there. A manifest records the config
snapshot, per-stage artifact paths, seeds, and wall-clock; everything except
wall-clock is reproduced bit-for-bit by re-running the same config and seed.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from stackcast import __version__
from stackcast.charts import bar_chart_svg
from stackcast.data import impute_missing, load_bar_csv, merge_exchanges, save_bar_csv
from stackcast.importance import ImportanceReport, stacked_importance
from stackcast.indicators import (
    FeatureFrame,
    build_feature_frame,
    catalog_names,
    default_catalog,
    get_spec,
    max_warmup,
)
from stackcast.models import DEFAULT_SPACES, load_model, make_model, save_model
from stackcast.stacking import LevelOneData, build_level_one, train_meta
from stackcast.validation import build_purged_folds, evaluate, expanding_monthly_folds

logger = logging.getLogger(__name__)

STAGE_ORDER = ("ingest", "features", "cv", "train", "stack", "evaluate", "importance", "report")

METRIC_ROWS = ("AUC", "Accuracy", "Precision", "Recall", "F1")

# every windowed row access funnels through select_window so tests can assert
# that no stage reads past its declared limit
_ACCESS_LOG: list[dict] = []


def select_window(frame: FeatureFrame, start, end, stage: str) -> FeatureFrame:
    sub = frame.window(start, end)
    _ACCESS_LOG.append(
        {
            "stage": stage,
            "start": str(pd.Timestamp(start).date()),
            "end": str(pd.Timestamp(end).date()),
            "max_row": str(sub.index.max().date()) if len(sub) else None,
        }
    )
    return sub


def substream_seed(master: int, *tags) -> int:
    """Deterministic named substream of the master seed."""
    digest = hashlib.sha256("/".join(str(t) for t in tags).encode()).digest()
    return int.from_bytes(digest[:4], "little") ^ (int(master) & 0x7FFFFFFF)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class WindowSpec:
    start: pd.Timestamp
    end: pd.Timestamp
    name: str

    @staticmethod
    def from_dict(doc: dict, default_name: str) -> "WindowSpec":
        return WindowSpec(
            start=pd.Timestamp(doc["start"]),
            end=pd.Timestamp(doc["end"]),
            name=str(doc.get("name", default_name)),
        )

    def to_dict(self) -> dict:
        return {"start": str(self.start.date()), "end": str(self.end.date()), "name": self.name}


@dataclass(frozen=True)
class RunConfig:
    seed: int
    output_dir: str
    exchange_files: list
    impute_alpha: float
    indicator_names: list | None
    extra_feature_files: dict
    level0: WindowSpec
    level1: WindowSpec
    holdout: WindowSpec
    first_test_month: str
    n_folds: int
    purge_days: int
    families: list
    search_iterations: int
    n_jobs: int
    categorical_features: list
    stack_mode: str
    hidden_width: int

    def validate(self) -> "RunConfig":
        if not self.exchange_files:
            raise ConfigError("at least one exchange file is required")
        if not (self.level0.end < self.level1.start):
            raise ConfigError("level-0 training must end before level-1 training starts")
        if not (self.level1.end < self.holdout.start):
            raise ConfigError("level-1 training must end before the holdout window starts")
        unknown = [f for f in self.families if f not in DEFAULT_SPACES]
        if unknown:
            raise ConfigError(f"unknown model families: {unknown}")
        if len(set(self.families)) != len(self.families):
            raise ConfigError("duplicate model families")
        if self.search_iterations < 1:
            raise ConfigError("search_iterations must be >= 1")
        if self.n_folds < 1:
            raise ConfigError("n_folds must be >= 1")
        if self.purge_days < 0:
            raise ConfigError("purge_days must be >= 0")
        if self.stack_mode not in ("hard", "proba"):
            raise ConfigError("stack mode must be 'hard' or 'proba'")
        if self.hidden_width < 0:
            raise ConfigError("hidden_width must be >= 0")
        last_test = pd.Period(self.first_test_month, freq="M") + (self.n_folds - 1)
        if last_test.to_timestamp(how="end") > self.level0.end + pd.Timedelta(days=1):
            raise ConfigError("fold test months must end inside the level-0 window")
        if self.indicator_names is not None:
            known = set(catalog_names())
            bad = [n for n in self.indicator_names if n not in known]
            if bad:
                raise ConfigError(f"unknown indicators: {bad}")
        return self

    @staticmethod
    def from_dict(doc: dict, base_dir: Path | None = None) -> "RunConfig":
        base = Path(base_dir) if base_dir is not None else Path.cwd()

        def resolve(p):
            p = Path(p)
            return str(p if p.is_absolute() else (base / p).resolve())

        data = doc.get("data", {})
        features = doc.get("features", {})
        windows = doc["windows"]
        cv = doc.get("cv", {})
        models = doc.get("models", {})
        stack = doc.get("stack", {})
        indicators = features.get("indicators", "all")
        return RunConfig(
            seed=int(doc.get("seed", 0)),
            output_dir=resolve(doc.get("output_dir", "runs/out")),
            exchange_files=[resolve(p) for p in data.get("exchange_files", [])],
            impute_alpha=float(data.get("impute_alpha", 2.0 / 11.0)),
            indicator_names=None if indicators == "all" else list(indicators),
            extra_feature_files={
                str(k): resolve(v) for k, v in (features.get("extra_feature_files") or {}).items()
            },
            level0=WindowSpec.from_dict(windows["level0_train"], "level-0 train"),
            level1=WindowSpec.from_dict(windows["level1_train"], "level-1 train"),
            holdout=WindowSpec.from_dict(windows["holdout"], "holdout"),
            first_test_month=str(cv.get("first_test_month", "2017-11")),
            n_folds=int(cv.get("n_folds", 5)),
            purge_days=int(cv.get("purge_days", 7)),
            families=list(models.get("families", list(DEFAULT_SPACES))),
            search_iterations=int(models.get("search_iterations", 100)),
            n_jobs=int(models.get("n_jobs", 1)),
            categorical_features=list(models.get("categorical_features", [])),
            stack_mode=str(stack.get("mode", "hard")),
            hidden_width=int(stack.get("hidden_width", 6)),
        ).validate()

    @staticmethod
    def from_yaml(path) -> "RunConfig":
        path = Path(path)
        doc = yaml.safe_load(path.read_text())
        if "config" in doc and "stages" in doc:  # a manifest: rerun its snapshot
            doc = doc["config"]
        return RunConfig.from_dict(doc, base_dir=path.parent)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "output_dir": self.output_dir,
            "data": {"exchange_files": list(self.exchange_files), "impute_alpha": self.impute_alpha},
            "features": {
                "indicators": "all" if self.indicator_names is None else list(self.indicator_names),
                "extra_feature_files": dict(self.extra_feature_files),
            },
            "windows": {
                "level0_train": self.level0.to_dict(),
                "level1_train": self.level1.to_dict(),
                "holdout": self.holdout.to_dict(),
            },
            "cv": {
                "first_test_month": self.first_test_month,
                "n_folds": self.n_folds,
                "purge_days": self.purge_days,
            },
            "models": {
                "families": list(self.families),
                "search_iterations": self.search_iterations,
                "n_jobs": self.n_jobs,
                "categorical_features": list(self.categorical_features),
            },
            "stack": {"mode": self.stack_mode, "hidden_width": self.hidden_width},
        }

    def with_overrides(self, seed=None, output_dir=None) -> "RunConfig":
        doc = self.to_dict()
        if seed is not None:
            doc["seed"] = int(seed)
        if output_dir is not None:
            doc["output_dir"] = str(Path(output_dir).resolve())
        return RunConfig.from_dict(doc)

    # -- derived helpers ------------------------------------------------------

    def specs(self):
        if self.indicator_names is None:
            return default_catalog()
        return [get_spec(n) for n in self.indicator_names]

    def report_windows(self) -> list[WindowSpec]:
        return [self.level1, self.holdout]


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------


@dataclass
class RunManifest:
    config: dict
    out_dir: Path
    stages: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def record(self, stage: str, artifacts: list, seconds: float) -> None:
        self.stages[stage] = {
            "artifacts": [str(Path(a).relative_to(self.out_dir)) for a in artifacts],
            "seconds": round(seconds, 3),
        }
        self.write()

    def note(self, message: str) -> None:
        self.notes.append(message)
        self.write()

    def to_dict(self) -> dict:
        return {
            "version": __version__,
            "config": self.config,
            "seed": self.config["seed"],
            "stages": self.stages,
            "notes": self.notes,
        }

    def write(self) -> None:
        path = self.out_dir / "manifest.json"
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    @staticmethod
    def load(out_dir) -> "RunManifest":
        doc = json.loads((Path(out_dir) / "manifest.json").read_text())
        manifest = RunManifest(config=doc["config"], out_dir=Path(out_dir))
        manifest.stages = doc["stages"]
        manifest.notes = doc["notes"]
        return manifest


def _require(out_dir: Path, stage: str, *names) -> list[Path]:
    paths = [out_dir / n for n in names]
    missing = [str(p) for p in paths if not p.exists()]
    if missing:
        raise FileNotFoundError(f"{stage}: missing artifacts: {missing}")
    return paths


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, sort_keys=True))


def _write_jsonl(path: Path, rows) -> None:
    path.write_text("".join(json.dumps(row, sort_keys=True) + "\n" for row in rows))


# ---------------------------------------------------------------------------
# stages
# ---------------------------------------------------------------------------


def stage_ingest(cfg: RunConfig, out: Path) -> list:
    sources = [load_bar_csv(p) for p in cfg.exchange_files]
    merged = merge_exchanges(sources)
    composite = impute_missing(merged, alpha=cfg.impute_alpha)
    needed = max_warmup(cfg.specs()) + 2
    if len(composite) < needed:
        raise ValueError(
            f"series of {len(composite)} bars is shorter than the {needed} required "
            "by the longest indicator warm-up plus labeling"
        )
    path = out / "composite.csv"
    save_bar_csv(composite, path)
    return [path]


def _load_extra_columns(cfg: RunConfig) -> dict:
    extra = {}
    for name, path in cfg.extra_feature_files.items():
        raw = pd.read_csv(path, parse_dates=["timestamp"], index_col="timestamp")
        extra[name] = raw.iloc[:, 0]
    return extra


def stage_features(cfg: RunConfig, out: Path) -> list:
    (composite_path,) = _require(out, "features", "composite.csv")
    composite = load_bar_csv(composite_path)
    frame = build_feature_frame(composite, specs=cfg.specs(), extra=_load_extra_columns(cfg))
    path = out / "features.csv"
    frame.to_csv(path)
    return [path]


def _fold_plan(cfg: RunConfig, frame: FeatureFrame):
    boundaries = expanding_monthly_folds(cfg.level0.start, cfg.first_test_month, cfg.n_folds)
    return build_purged_folds(frame.index, boundaries, purge=pd.Timedelta(days=cfg.purge_days))


def stage_cv(cfg: RunConfig, out: Path) -> list:
    (features_path,) = _require(out, "cv", "features.csv")
    frame = FeatureFrame.from_csv(features_path)
    plan = _fold_plan(cfg, frame)
    path = out / "folds.json"
    _write_json(path, plan.to_dict())
    return [path]


def stage_train(cfg: RunConfig, out: Path, manifest: RunManifest | None = None) -> list:
    from stackcast.validation import random_search

    (features_path,) = _require(out, "train", "features.csv")
    frame = FeatureFrame.from_csv(features_path)
    plan = _fold_plan(cfg, frame)
    level0 = select_window(frame, cfg.level0.start, cfg.level0.end, "train")
    (out / "models").mkdir(exist_ok=True)

    artifacts = []
    for family in cfg.families:
        space = DEFAULT_SPACES[family]
        n_iter = cfg.search_iterations if len(space) else 1
        extra = {}
        if family == "lgbm" and cfg.categorical_features:
            extra["categorical_features"] = tuple(cfg.categorical_features)

        def make(params, seed=0, _family=family, _extra=extra):
            return make_model(_family, {**params, **_extra}, seed=seed)

        result = random_search(
            make,
            space,
            plan,
            level0.features,
            level0.labels,
            n_iter=n_iter,
            seed=substream_seed(cfg.seed, "search", family),
            n_jobs=cfg.n_jobs,
        )
        trials_path = out / f"trials_{family}.jsonl"
        _write_jsonl(trials_path, [t.to_dict() for t in result.trials])

        model = make(result.best_params, seed=substream_seed(cfg.seed, "fit", family))
        model.fit(level0.features, level0.labels.to_numpy())
        model.train_range_ = (
            str(level0.index.min().date()),
            str(level0.index.max().date()),
        )
        model_path = out / "models" / f"{family}.json"
        save_model(model, model_path)
        artifacts.extend([trials_path, model_path])
        logger.info(
            "train[%s]: best trial %d, mean fold log-loss %.4f",
            family, result.best_index, result.best_score,
        )
        if manifest is not None:
            manifest.note(
                f"train[{family}]: best trial {result.best_index} "
                f"log-loss {result.best_score:.6f}"
            )
    return artifacts


def _load_models(cfg: RunConfig, out: Path, stage: str) -> list:
    paths = _require(out, stage, *[f"models/{f}.json" for f in cfg.families])
    return [load_model(p) for p in paths]


def stage_stack(cfg: RunConfig, out: Path, manifest: RunManifest | None = None) -> list:
    if len(cfg.families) < 2:
        message = (
            f"stack skipped: {len(cfg.families)} model family is fewer than the "
            "2 generalizers stacking needs"
        )
        logger.warning(message)
        if manifest is not None:
            manifest.note(message)
        return []
    (features_path,) = _require(out, "stack", "features.csv")
    frame = FeatureFrame.from_csv(features_path)
    models = _load_models(cfg, out, "stack")
    window = select_window(frame, cfg.level1.start, cfg.level1.end, "stack")

    level_one = build_level_one(
        models, window, (cfg.level1.start, cfg.level1.end),
        mode=cfg.stack_mode, names=list(cfg.families),
    )
    meta = train_meta(level_one, width=cfg.hidden_width, seed=substream_seed(cfg.seed, "stack"))
    meta.train_range_ = (str(window.index.min().date()), str(window.index.max().date()))

    level_one_path = out / "level_one.json"
    _write_json(level_one_path, level_one.to_dict())
    meta_path = out / "models" / "meta.json"
    save_model(meta, meta_path)
    curve_path = out / "meta_curve.jsonl"
    _write_jsonl(
        curve_path,
        [{"epoch": i, "log_loss": v} for i, v in enumerate(meta.loss_path_)],
    )
    return [level_one_path, meta_path, curve_path]


def stage_evaluate(cfg: RunConfig, out: Path) -> list:
    (features_path,) = _require(out, "evaluate", "features.csv")
    frame = FeatureFrame.from_csv(features_path)
    models = _load_models(cfg, out, "evaluate")
    meta_path = out / "models" / "meta.json"
    meta = load_model(meta_path) if meta_path.exists() else None

    rows = []
    for window in cfg.report_windows():
        sub = select_window(frame, window.start, window.end, "evaluate")
        for family, model in zip(cfg.families, models):
            proba = model.predict_proba(sub.features)
            labels = model.predict(sub.features)
            report = evaluate(proba, labels, sub.labels.to_numpy(), window_id=window.name)
            rows.append({"model": family, **report.to_dict()})
        if meta is not None:
            level_one = build_level_one(
                models, sub, (window.start, window.end),
                mode=cfg.stack_mode, names=list(cfg.families),
            )
            proba = meta.predict_proba(level_one.Z)
            labels = meta.predict(level_one.Z)
            report = evaluate(proba, labels, level_one.y, window_id=window.name)
            rows.append({"model": "stacked", **report.to_dict()})

    table = pd.DataFrame(rows)
    csv_path = out / "metrics.csv"
    table.to_csv(csv_path, index=False, float_format="%.10g")
    jsonl_path = out / "metrics.jsonl"
    _write_jsonl(jsonl_path, rows)
    return [csv_path, jsonl_path]


def stage_importance(cfg: RunConfig, out: Path) -> list:
    (features_path,) = _require(out, "importance", "features.csv")
    frame = FeatureFrame.from_csv(features_path)
    models = _load_models(cfg, out, "importance")
    background = select_window(frame, cfg.level0.start, cfg.level0.end, "importance").features

    meta_path = out / "models" / "meta.json"
    if meta_path.exists():
        meta = load_model(meta_path)
        level_one = LevelOneData.from_dict(json.loads((out / "level_one.json").read_text()))
    else:
        meta = None
        level_one = None
    report = stacked_importance(
        meta, models, level_one, background, names=list(cfg.families)
    )

    csv_path = out / "importance.csv"
    report.to_frame().to_csv(csv_path, index=False, float_format="%.10g")

    charts_dir = out / "charts"
    charts_dir.mkdir(exist_ok=True)
    artifacts = [csv_path]

    names = list(report.weights)
    chart = charts_dir / "model_importance.svg"
    bar_chart_svg(names, [report.weights[n] for n in names], "Model importance (stack weights)",
                  chart, xlabel="weight")
    artifacts.append(chart)

    top = sorted(report.combined.items(), key=lambda kv: (-kv[1], kv[0]))[:15]
    chart = charts_dir / "importance_combined.svg"
    bar_chart_svg([k for k, _ in top], [v for _, v in top], "Overall feature importance", chart)
    artifacts.append(chart)

    for family in cfg.families:
        scores = report.per_model[family]
        top = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[:10]
        chart = charts_dir / f"importance_{family}.svg"
        bar_chart_svg([k for k, _ in top], [v for _, v in top], f"Feature importance: {family}", chart)
        artifacts.append(chart)
    return artifacts


def render_report(cfg: RunConfig, out: Path) -> str:
    (metrics_path,) = _require(out, "report", "metrics.csv")
    metrics = pd.read_csv(metrics_path)
    window_names = [w.name for w in cfg.report_windows()]
    lines = []
    lines.append("Model performance")
    lines.append("=" * 17)
    label_of = {
        "AUC": "auc", "Accuracy": "accuracy", "Precision": "precision",
        "Recall": "recall", "F1": "f1",
    }
    col_width = max(len(n) for n in window_names) + 4
    for model in dict.fromkeys(metrics["model"]):
        sub = metrics[metrics["model"] == model]
        lines.append("")
        lines.append(f"== {model} ==")
        header = "Parameter".ljust(12) + "".join(n.ljust(col_width) for n in window_names)
        lines.append(header.rstrip())
        for row_name in METRIC_ROWS:
            cells = []
            for window in window_names:
                match = sub[sub["window_id"] == window]
                if len(match) != 1:
                    raise ValueError(f"report: missing metrics for {model!r} in {window!r}")
                value = match.iloc[0][label_of[row_name]]
                cells.append(("" if pd.isna(value) else f"{value:.4f}").ljust(col_width))
            lines.append(row_name.ljust(12) + "".join(cells).rstrip())

    importance_path = out / "importance.csv"
    if importance_path.exists():
        report = ImportanceReport.from_frame(pd.read_csv(importance_path))
        lines.append("")
        lines.append("Stack model weights")
        lines.append("=" * 19)
        for name, weight in sorted(report.weights.items(), key=lambda kv: (-kv[1], kv[0])):
            lines.append(f"{name.ljust(12)}{weight:.4f}")
        lines.append("")
        lines.append("Top combined feature importance")
        lines.append("=" * 31)
        top = sorted(report.combined.items(), key=lambda kv: (-kv[1], kv[0]))[:15]
        for name, score in top:
            lines.append(f"{name.ljust(24)}{score:.6f}")
    return "\n".join(lines) + "\n"


def stage_report(cfg: RunConfig, out: Path) -> list:
    path = out / "report.txt"
    path.write_text(render_report(cfg, out))
    return [path]


_STAGES = {
    "ingest": stage_ingest,
    "features": stage_features,
    "cv": stage_cv,
    "train": stage_train,
    "stack": stage_stack,
    "evaluate": stage_evaluate,
    "importance": stage_importance,
    "report": stage_report,
}


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


def run_stage(cfg: RunConfig, stage: str, manifest: RunManifest | None = None) -> list:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    fn = _STAGES[stage]
    try:
        if stage in ("train", "stack"):
            return fn(cfg, out, manifest)
        return fn(cfg, out)
    except Exception as exc:
        raise StageError(stage, exc) from exc


def run_pipeline(cfg: RunConfig) -> RunManifest:
    """Execute every stage in order, recording artifacts and timings."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(config=cfg.to_dict(), out_dir=out)
    manifest.write()
    for stage in STAGE_ORDER:
        started = time.perf_counter()
        artifacts = run_stage(cfg, stage, manifest)
        manifest.record(stage, artifacts, time.perf_counter() - started)
        logger.info("stage %s done (%d artifacts)", stage, len(artifacts))
    return manifest
