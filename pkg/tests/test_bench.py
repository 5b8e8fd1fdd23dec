import pytest

from UQ_Engine_Helper.bench import (
    Clock,
    Scheduling,
    WaitModel,
    WaitingModel,
    bench_run,
    weak_scaling_sweep,
)
from UQ_Engine_Helper.sample import ModelSample


def test_wait_model_validation():
    with pytest.raises(ValueError):
        WaitModel.fixed(-1.0)
    with pytest.raises(ValueError):
        WaitModel.uniform(2.0, 1.0)
    with pytest.raises(ValueError):
        Scheduling.multiple(0)


def test_uniform_durations_depend_only_on_sample_identity():
    wait = WaitModel.uniform(0.5, 1.5, seed=4)
    assert wait.duration("bench-0", "0-1") == wait.duration("bench-0", "0-1")
    assert wait.duration("bench-0", "0-1") != wait.duration("bench-0", "0-2")
    assert 0.5 <= wait.duration("bench-1", "3-7") <= 1.5
    assert WaitModel.fixed(0.2).duration("x", "y") == 0.2


def test_waiting_model_reports_a_value_and_sleeps_in_real_time():
    model = WaitingModel(WaitModel.fixed(0.01, Clock.REAL))
    sample = ModelSample("bench-0", "0-0", [0.0], {"X": 0.0})
    model(sample)
    assert -1.0 <= sample["F(x)"] <= 1.0
    assert model.total_wait == pytest.approx(0.01)


def test_scheduling_labels():
    assert Scheduling.single().label() == "Single"
    assert Scheduling.single(2).label() == "Single x2"
    assert Scheduling.multiple(3).label() == "Multiple(3)"


def test_fixed_wait_is_perfectly_efficient_on_simulated_clock(tmp_path):
    report = bench_run(4, 3, WaitModel.fixed(0.5), out_dir=tmp_path)
    assert report.population == 16
    assert report.evaluations == 48
    assert report.e_ideal == 1.0
    assert report.makespan == pytest.approx(3 * 4 * 0.5)
    assert report.e_busy == pytest.approx(1.0)
    assert report.idle_time == pytest.approx(0.0, abs=1e-9)


def test_imbalanced_waits_leave_idle_time(tmp_path):
    report = bench_run(4, 3, WaitModel.uniform(0.1, 1.9), out_dir=tmp_path)
    assert report.e_ideal < 1.0
    assert report.idle_time > 0
    assert len(report.intervals) == report.evaluations


def test_bench_runs_are_reproducible(tmp_path):
    first = bench_run(4, 2, WaitModel.uniform(0.1, 1.0), out_dir=tmp_path / "a", seed=3)
    second = bench_run(4, 2, WaitModel.uniform(0.1, 1.0), out_dir=tmp_path / "b", seed=3)
    assert first.intervals == second.intervals
    assert first.e_ideal == second.e_ideal


def test_multiple_experiments_fill_idle_gaps(tmp_path):
    wait = WaitModel.uniform(0.1, 1.9)
    single = bench_run(4, 3, wait, Scheduling.single(2), out_dir=tmp_path / "single", seed=8)
    multiple = bench_run(4, 3, wait, Scheduling.multiple(2), out_dir=tmp_path / "multiple", seed=8)
    assert single.evaluations == multiple.evaluations == 96
    assert single.ideal_time == pytest.approx(multiple.ideal_time)
    assert multiple.makespan < single.makespan
    assert multiple.e_ideal > single.e_ideal
    assert {e for _, _, _, e in multiple.intervals} == {"bench-0", "bench-1"}


def test_real_clock_bench(tmp_path):
    report = bench_run(2, 1, WaitModel.fixed(0.02, Clock.REAL), population_factor=2, out_dir=tmp_path)
    assert report.clock == "real"
    assert report.evaluations == 4
    assert 0.0 < report.e_ideal <= 1.0
    assert report.busy_time >= 4 * 0.02


def test_bench_needs_a_worker(tmp_path):
    with pytest.raises(ValueError):
        bench_run(0, 1, WaitModel.fixed(0.1), out_dir=tmp_path)


def test_single_repetition_sweep_has_no_spread(tmp_path):
    sweep = weak_scaling_sweep([2, 4], 1, 2, WaitModel.uniform(0.1, 1.9), out_dir=tmp_path)
    assert list(sweep["Workers"]) == [2, 4]
    assert (sweep["Min e_ideal"] == sweep["Max e_ideal"]).all()
    assert (sweep["Median e_ideal"] == sweep["Min e_ideal"]).all()


@pytest.mark.slow
def test_weak_scaling_efficiency_drops_with_worker_count(tmp_path):
    sweep = weak_scaling_sweep([1, 4, 128], 5, 3, WaitModel.uniform(0.1, 1.9), out_dir=tmp_path)
    medians = list(sweep["Median e_ideal"])
    assert medians[0] == 1.0
    assert medians[0] > medians[1] > medians[2]
    assert (sweep["Min e_ideal"] <= sweep["Median e_ideal"]).all()
    assert (sweep["Median e_ideal"] <= sweep["Max e_ideal"]).all()


def test_sweep_needs_repetitions(tmp_path):
    with pytest.raises(ValueError):
        weak_scaling_sweep([2], 0, 1, WaitModel.fixed(0.1), out_dir=tmp_path)


@pytest.mark.slow
def test_fixed_wait_on_real_clock_is_close_to_ideal(tmp_path):
    report = bench_run(8, 5, WaitModel.fixed(0.1, Clock.REAL), out_dir=tmp_path)
    assert report.evaluations == 8 * 4 * 5
    assert report.ideal_time == pytest.approx(2.0)
    assert report.e_ideal >= 0.85


def test_multiple_scheduling_beats_sequential_experiments_on_busy_ratio(tmp_path):
    wait = WaitModel.uniform(0.4, 1.0)
    single = bench_run(8, 5, wait, Scheduling.single(5), out_dir=tmp_path / "single", seed=11)
    multiple = bench_run(8, 5, wait, Scheduling.multiple(5), out_dir=tmp_path / "multiple", seed=11)
    assert single.population == multiple.population == 32
    assert multiple.e_busy - single.e_busy >= 0.10
    assert multiple.makespan < single.makespan


@pytest.mark.slow
def test_multiple_scheduling_is_more_efficient_at_every_worker_count(tmp_path):
    wait = WaitModel.uniform(0.4, 1.0)
    counts = [8, 16, 32, 64]
    single = weak_scaling_sweep(counts, 10, 3, wait, Scheduling.single(3), out_dir=tmp_path / "single")
    multiple = weak_scaling_sweep(counts, 10, 3, wait, Scheduling.multiple(3), out_dir=tmp_path / "multiple")
    assert list(multiple["Workers"]) == counts
    assert list(single["Repetitions"]) == [10] * 4
    medians = list(single["Median e_ideal"])
    assert all(b <= a for a, b in zip(medians, medians[1:]))
    assert (multiple["Median e_busy"] > single["Median e_busy"]).all()
    assert (multiple["Median e_ideal"] > single["Median e_ideal"]).all()
