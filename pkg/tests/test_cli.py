from pathlib import Path

import pytest
from click.testing import CliRunner

from stackcast.cli import main
from tests.conftest import write_exchange_data, write_mini_config


@pytest.fixture(scope="module")
def env(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli")
    data_dir = tmp / "data"
    write_exchange_data(data_dir)
    config = write_mini_config(
        tmp / "config.yaml", data_dir, tmp / "out", families=("knn", "nb"), search_iterations=2
    )
    return tmp, config


def test_verbs_exist():
    runner = CliRunner()
    result = runner.invoke(main, ["--help"])
    assert result.exit_code == 0
    for verb in ("ingest", "features", "cv", "train", "stack", "evaluate",
                 "importance", "run", "report"):
        assert f"\n  {verb}" in result.output


def test_stagewise_run_matches_verb_chain(env):
    tmp, config = env
    runner = CliRunner()
    for verb in ("ingest", "features", "cv", "train", "stack", "evaluate", "importance", "report"):
        result = runner.invoke(main, [verb, "--config", str(config)])
        assert result.exit_code == 0, (verb, result.output)
    assert (tmp / "out" / "report.txt").exists()


def test_run_writes_manifest_and_honors_out_override(env, tmp_path):
    _, config = env
    runner = CliRunner()
    out = tmp_path / "override"
    result = runner.invoke(main, ["run", "--config", str(config), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert (out / "manifest.json").exists()
    assert result.output.strip().endswith("manifest.json")


def test_missing_artifacts_give_stage_tagged_nonzero_exit(env, tmp_path):
    _, config = env
    runner = CliRunner()
    result = runner.invoke(main, ["evaluate", "--config", str(config), "--out", str(tmp_path / "empty")])
    assert result.exit_code == 1
    assert "[evaluate]" in result.output
    assert "missing artifacts" in result.output


def test_bad_config_rejected(env, tmp_path):
    tmp, config = env
    broken = tmp_path / "broken.yaml"
    broken.write_text(config.read_text().replace("families: [knn, nb]", "families: [knn, knn]"))
    runner = CliRunner()
    result = runner.invoke(main, ["run", "--config", str(broken)])
    assert result.exit_code == 1
    assert "duplicate model families" in result.output
