import pytest

from UQ_Engine_Helper.bench import WaitModel, bench_run
from UQ_Engine_Helper.engine import Experiment, engine_run
from UQ_Engine_Helper.exceptions import CheckpointIoError
from UQ_Engine_Helper.report_generator import timeline_export
from UQ_Engine_Helper.results_browser import ResultsBrowser

from tests.conftest import optimization_config


@pytest.fixture
def populated_root(tmp_path):
    engine_run(Experiment(optimization_config(generations=3), name="alpha", results_root=tmp_path))
    report = bench_run(2, 1, WaitModel.fixed(0.1), out_dir=tmp_path)
    timeline_export(report, tmp_path / "rep00_timeline.csv")
    return tmp_path


def test_missing_root(tmp_path):
    browser = ResultsBrowser(tmp_path / "nowhere")
    assert not browser.path_exists()
    assert browser.get_experiments() == []
    assert browser.get_timelines() == []


def test_lists_experiments_including_bench_subdirectory(populated_root):
    assert ResultsBrowser(populated_root).get_experiments() == ["alpha", "bench/bench-0"]


def test_checkpoints_and_summary(populated_root):
    browser = ResultsBrowser(populated_root)
    assert browser.get_checkpoints("alpha") == [0, 1, 2]
    assert browser.latest_checkpoint("alpha").name == "gen00002.state"
    assert list(browser.load_summary("alpha")["Generation"]) == [0, 1, 2]
    assert browser.load_checkpoint("alpha")["generation"] == 3
    assert browser.load_checkpoint("alpha", 0)["generation"] == 1


def test_bench_keeps_only_the_newest_checkpoint(populated_root):
    assert ResultsBrowser(populated_root).get_checkpoints("bench/bench-0") == [0]


def test_missing_summary_is_empty(populated_root):
    assert ResultsBrowser(populated_root).load_summary("ghost").empty


def test_timelines(populated_root):
    browser = ResultsBrowser(populated_root)
    timelines = browser.get_timelines()
    assert [p.name for p in timelines] == ["rep00_timeline.csv"]
    assert len(browser.load_timeline(timelines[0])) == 8


def test_resolve_checkpoint_accepts_names_and_paths(populated_root):
    browser = ResultsBrowser(populated_root)
    newest = populated_root / "alpha" / "gen00002.state"
    assert browser.resolve_checkpoint("alpha") == newest
    assert browser.resolve_checkpoint(populated_root / "alpha") == newest
    assert browser.resolve_checkpoint(populated_root / "alpha" / "gen00000.state").name == "gen00000.state"
    with pytest.raises(CheckpointIoError):
        browser.resolve_checkpoint("ghost")
