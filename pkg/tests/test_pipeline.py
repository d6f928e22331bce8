import hashlib
import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

import stackcast.pipeline as pipeline_mod
from stackcast.pipeline import (
    ConfigError,
    METRIC_ROWS,
    RunConfig,
    StageError,
    render_report,
    run_pipeline,
    run_stage,
)
from tests.conftest import write_exchange_data, write_mini_config


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("exchange_data")
    write_exchange_data(directory)
    return directory


def _run(tmp_path, data_dir, name="out", **kwargs) -> tuple:
    config_path = write_mini_config(
        tmp_path / f"{name}.yaml", data_dir, tmp_path / name, **kwargs
    )
    cfg = RunConfig.from_yaml(config_path)
    manifest = run_pipeline(cfg)
    return cfg, manifest, tmp_path / name


def _artifact_hashes(out_dir: Path) -> dict:
    out = {}
    for path in sorted(out_dir.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            out[str(path.relative_to(out_dir))] = hashlib.sha256(path.read_bytes()).hexdigest()
    return out


class TestConfig:
    def test_window_ordering_enforced(self, tmp_path, data_dir):
        path = write_mini_config(tmp_path / "c.yaml", data_dir, tmp_path / "o")
        doc = path.read_text().replace("start: 2018-04-01", "start: 2018-03-15")
        path.write_text(doc)
        with pytest.raises(ConfigError, match="level-0 training must end before"):
            RunConfig.from_yaml(path)

    def test_unknown_family_rejected(self, tmp_path, data_dir):
        path = write_mini_config(tmp_path / "c.yaml", data_dir, tmp_path / "o",
                                 families=("knn", "catboost"))
        with pytest.raises(ConfigError, match="unknown model families"):
            RunConfig.from_yaml(path)

    def test_fold_months_must_fit_level0(self, tmp_path, data_dir):
        path = write_mini_config(tmp_path / "c.yaml", data_dir, tmp_path / "o")
        doc = path.read_text().replace('first_test_month: "2017-11"', 'first_test_month: "2018-01"')
        path.write_text(doc)
        with pytest.raises(ConfigError, match="fold test months"):
            RunConfig.from_yaml(path)

    def test_relative_paths_resolve_against_config_dir(self, tmp_path, data_dir):
        nested = tmp_path / "nested"
        nested.mkdir()
        path = write_mini_config(nested / "c.yaml", data_dir, "out_rel")
        cfg = RunConfig.from_yaml(path)
        assert Path(cfg.output_dir) == (nested / "out_rel").resolve()


@pytest.fixture(scope="module")
def run(tmp_path_factory, data_dir):
    tmp = tmp_path_factory.mktemp("fullrun")
    return _run(tmp, data_dir)


class TestFullRun:
    def test_all_stages_recorded_with_artifacts(self, run):
        cfg, manifest, out = run
        assert list(manifest.stages) == list(pipeline_mod.STAGE_ORDER)
        for stage in ("ingest", "features", "cv", "train", "stack", "evaluate", "importance"):
            assert manifest.stages[stage]["artifacts"], stage
        for name in ("composite.csv", "features.csv", "folds.json", "level_one.json",
                     "metrics.csv", "importance.csv", "report.txt", "manifest.json",
                     "models/knn.json", "models/meta.json", "meta_curve.jsonl"):
            assert (out / name).exists(), name

    def test_metrics_cover_every_model_and_both_windows(self, run):
        cfg, _, out = run
        metrics = pd.read_csv(out / "metrics.csv")
        assert set(metrics["model"]) == set(cfg.families) | {"stacked"}
        assert set(metrics["window_id"]) == {"Apr-May 2018", "June - July 2018"}
        assert len(metrics) == (len(cfg.families) + 1) * 2

    def test_report_schema_matches_metric_rows_and_windows(self, run):
        cfg, _, out = run
        text = (out / "report.txt").read_text()
        for model in list(cfg.families) + ["stacked"]:
            assert f"== {model} ==" in text
        header_lines = [l for l in text.splitlines() if l.startswith("Parameter")]
        assert len(header_lines) == len(cfg.families) + 1
        for line in header_lines:
            assert "Apr-May 2018" in line and "June - July 2018" in line
        for model_block in text.split("== ")[1:]:
            if not model_block.split(" ==")[0] in list(cfg.families) + ["stacked"]:
                continue
            rows = [l.split()[0] for l in model_block.splitlines()[2:7]]
            assert rows == list(METRIC_ROWS)

    def test_report_regeneration_is_byte_identical(self, run):
        cfg, _, out = run
        original = (out / "report.txt").read_bytes()
        regenerated = render_report(cfg, out).encode()
        assert regenerated == original

    def test_fold_plan_artifact_has_week_gaps(self, run):
        _, _, out = run
        folds = json.loads((out / "folds.json").read_text())
        assert folds["purge_days"] == 7
        assert len(folds["folds"]) == 5
        for fold in folds["folds"]:
            gap = pd.Timestamp(fold["test"][0]) - pd.Timestamp(fold["train"][1])
            assert gap > pd.Timedelta(days=7)

    def test_importance_table_schema(self, run):
        cfg, _, out = run
        table = pd.read_csv(out / "importance.csv")
        assert list(table.columns) == ["model", "feature", "score", "weight"]
        stacked = table[table["model"] == "stacked"]
        assert set(stacked["feature"]) == set(cfg.families)
        assert stacked["weight"].sum() == pytest.approx(1.0)
        assert (out / "charts" / "model_importance.svg").exists()
        assert (out / "charts" / "importance_combined.svg").exists()

    def test_access_log_respects_declared_windows(self, run):
        cfg, _, _ = run
        limits = {
            "train": cfg.level0.end,
            "importance": cfg.level0.end,
            "stack": cfg.level1.end,
            "evaluate": cfg.holdout.end,
        }
        stages_seen = set()
        for access in pipeline_mod._ACCESS_LOG:
            stage = access["stage"]
            stages_seen.add(stage)
            assert pd.Timestamp(access["end"]) <= limits[stage], access
            if access["max_row"] is not None:
                assert pd.Timestamp(access["max_row"]) <= limits[stage], access
        assert {"train", "stack", "evaluate", "importance"} <= stages_seen

    def test_sentiment_column_flows_to_importance(self, run):
        _, _, out = run
        table = pd.read_csv(out / "importance.csv")
        combined = table[table["model"] == "combined"]
        assert "sentiment_positive" in set(combined["feature"])


class TestDeterminism:
    def test_rerun_same_config_is_byte_identical(self, tmp_path, data_dir):
        config_path = write_mini_config(
            tmp_path / "c.yaml", data_dir, tmp_path / "out",
            families=("knn", "nb"), search_iterations=3, seed=5,
        )
        cfg = RunConfig.from_yaml(config_path)
        first = run_pipeline(cfg)
        hashes_first = _artifact_hashes(tmp_path / "out")
        manifest_first = first.to_dict()

        second = run_pipeline(RunConfig.from_yaml(config_path))
        hashes_second = _artifact_hashes(tmp_path / "out")
        manifest_second = second.to_dict()

        assert hashes_first == hashes_second
        for doc in (manifest_first, manifest_second):
            for stage in doc["stages"].values():
                stage.pop("seconds")
        assert manifest_first == manifest_second

    def test_rerun_from_manifest_reproduces(self, tmp_path, data_dir):
        config_path = write_mini_config(
            tmp_path / "c.yaml", data_dir, tmp_path / "out",
            families=("knn", "lda"), search_iterations=2, seed=9,
        )
        run_pipeline(RunConfig.from_yaml(config_path))
        hashes = _artifact_hashes(tmp_path / "out")
        run_pipeline(RunConfig.from_yaml(tmp_path / "out" / "manifest.json"))
        assert _artifact_hashes(tmp_path / "out") == hashes


class TestDegenerateConfigs:
    def test_single_family_skips_stack_with_notice(self, tmp_path, data_dir):
        cfg, manifest, out = _run(
            tmp_path, data_dir, families=("knn",), search_iterations=2, name="solo"
        )
        assert any("stack skipped" in note for note in manifest.notes)
        assert not (out / "models" / "meta.json").exists()
        metrics = pd.read_csv(out / "metrics.csv")
        assert set(metrics["model"]) == {"knn"}
        table = pd.read_csv(out / "importance.csv")
        stacked = table[table["model"] == "stacked"]
        assert stacked["weight"].tolist() == [1.0]

    def test_stage_failure_is_tagged_and_partial_manifest_kept(self, tmp_path, data_dir):
        config_path = write_mini_config(
            tmp_path / "c.yaml", data_dir, tmp_path / "broken", families=("knn",)
        )
        cfg = RunConfig.from_yaml(config_path)
        with pytest.raises(StageError, match=r"\[evaluate\].*missing artifacts"):
            run_stage(cfg, "evaluate")

    def test_too_short_series_rejected_at_ingest(self, tmp_path):
        short_dir = tmp_path / "short"
        paths, _ = write_exchange_data(short_dir, n_days=70, with_gaps=False)
        cfg = RunConfig.from_dict(
            {
                "seed": 1,
                "output_dir": str(tmp_path / "o2"),
                "data": {"exchange_files": [str(p) for p in paths]},
                "windows": {
                    "level0_train": {"start": "2017-05-01", "end": "2017-06-30"},
                    "level1_train": {"start": "2017-07-01", "end": "2017-07-04"},
                    "holdout": {"start": "2017-07-05", "end": "2017-07-09"},
                },
                "cv": {"first_test_month": "2017-06", "n_folds": 1},
                "models": {"families": ["knn"], "search_iterations": 1},
            }
        )
        with pytest.raises(StageError, match=r"\[ingest\].*warm-up"):
            run_stage(cfg, "ingest")
