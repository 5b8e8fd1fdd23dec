import pytest

from UQ_Engine_Helper.concurrent_model import ModelBinding
from UQ_Engine_Helper.conduit import (
    PendingQueue,
    ThreadConduit,
    WorkerHandle,
    WorkerState,
    conduit_start,
    teams_for_processes,
    validate_transition_log,
)
from UQ_Engine_Helper.exceptions import ConduitError, UnknownExperimentError
from UQ_Engine_Helper.sample import Sample, SampleStatus
from UQ_Engine_Helper.simulated_conduit import SimulatedConduit

from tests import models


def _samples(experiment_id, count, start=0):
    return [Sample(experiment_id, f"0-{i}", [float(i)], {"X": float(i)}) for i in range(start, start + count)]


def _drain(conduit):
    outcomes = []
    while conduit.outstanding():
        conduit.dispatch_step()
        conduit.wait(5.0)
        outcomes.extend(conduit.collect())
    return outcomes


def test_legal_and_illegal_transitions():
    worker = WorkerHandle(0)
    worker.transition(WorkerState.BUSY)
    with pytest.raises(ConduitError):
        worker.transition(WorkerState.IDLE)
    worker.transition(WorkerState.PENDING)
    worker.transition(WorkerState.IDLE)
    assert worker.state_log() == [WorkerState.IDLE, WorkerState.BUSY, WorkerState.PENDING, WorkerState.IDLE]


def test_transition_log_validator():
    I, B, P = WorkerState.IDLE, WorkerState.BUSY, WorkerState.PENDING
    assert validate_transition_log([I, B, P, I, B, P, I])
    assert validate_transition_log([I, B, P, I, B, P])
    assert validate_transition_log([])
    assert not validate_transition_log([I, B, I])
    assert not validate_transition_log([I, P])


def test_pending_queue_is_fifo():
    queue = PendingQueue()
    for sample in _samples("a", 2) + _samples("b", 1):
        queue.push(sample)
    assert queue.experiments() == ["a", "b"]
    assert queue.pop().sample_id == "0-0"
    assert len(queue) == 2


def test_teams_for_processes():
    assert teams_for_processes(9, 2) == 4
    assert teams_for_processes(2, 1) == 1
    with pytest.raises(ValueError):
        teams_for_processes(1, 1)


def test_worker_count_must_be_positive():
    with pytest.raises(ValueError):
        ThreadConduit(0)


def test_unknown_experiment():
    with ThreadConduit(1) as conduit:
        with pytest.raises(UnknownExperimentError):
            conduit.submit("nobody", _samples("nobody", 1))


def test_thread_conduit_runs_every_sample_once():
    with conduit_start(3) as conduit:
        conduit.register("a", ModelBinding.in_process(models.parabola))
        conduit.submit("a", _samples("a", 20))
        outcomes = _drain(conduit)
    assert sorted(o.sample_id for o in outcomes) == sorted(f"0-{i}" for i in range(20))
    assert all(not o.failed for o in outcomes)
    assert {o.sample_id: o.result["F(x)"] for o in outcomes}["0-3"] == 0.0
    assert all(validate_transition_log(log) for log in conduit.transition_logs().values())


def test_model_error_fails_without_retry():
    with ThreadConduit(2) as conduit:
        conduit.register("a", ModelBinding.in_process(models.broken))
        samples = _samples("a", 3)
        conduit.submit("a", samples)
        outcomes = _drain(conduit)
    assert len(outcomes) == 3
    assert all(o.failed and "model exploded" in o.error for o in outcomes)
    assert all(s.attempts == 1 and s.status == SampleStatus.FAILED for s in samples)


def test_lowest_idle_worker_gets_the_front_sample():
    conduit = SimulatedConduit(3, duration=1.0).start()
    conduit.register("a", ModelBinding.in_process(models.parabola))
    conduit.submit("a", _samples("a", 2))
    conduit.dispatch_step()
    assert [(w, s) for _, w, _, s in conduit.assignment_log] == [(0, "0-0"), (1, "0-1")]
    assert [w.state for w in conduit.workers] == [WorkerState.BUSY, WorkerState.BUSY, WorkerState.IDLE]


def test_assignment_order_follows_enqueue_order_across_experiments():
    conduit = SimulatedConduit(1, duration=0.5).start()
    conduit.register("a", ModelBinding.in_process(models.parabola))
    conduit.register("b", ModelBinding.in_process(models.quadratic))
    expected = []
    for i in range(5):
        for name in ("a", "b"):
            sample = Sample(name, f"0-{i}", [0.0], {"X": 0.0})
            conduit.submit(name, [sample])
            expected.append((name, sample.sample_id))
    outcomes = _drain(conduit)
    assert [(e, s) for _, _, e, s in conduit.assignment_log] == expected
    assert len(outcomes) == 10


def test_simulated_clock_and_busy_intervals():
    conduit = SimulatedConduit(2, duration=1.5).start()
    conduit.register("a", ModelBinding.in_process(models.parabola))
    conduit.submit("a", _samples("a", 4))
    _drain(conduit)
    assert conduit.now() == pytest.approx(3.0)
    assert [w.busy_time for w in conduit.workers] == [pytest.approx(3.0), pytest.approx(3.0)]
    assert conduit.workers[0].busy_intervals[0][:2] == (0.0, 1.5)


def test_crash_injection_accounts_for_every_sample_exactly_once():
    conduit = SimulatedConduit(8, duration=lambda s: 0.01, crash_rate=0.01, seed=3).start()
    conduit.register("a", ModelBinding.in_process(models.quadratic))
    samples = [Sample("a", str(i), [1.0], {"X": 1.0}) for i in range(10_000)]
    conduit.submit("a", samples)
    outcomes = _drain(conduit)

    ids = [o.sample_id for o in outcomes]
    assert len(ids) == 10_000
    assert len(set(ids)) == 10_000
    failed = [o for o in outcomes if o.failed]
    assert conduit.crashes > 0
    assert len(failed) < conduit.crashes
    assert all(s.attempts == 2 for s in samples if s.status == SampleStatus.FAILED)
    assert sum(s.attempts for s in samples) == 10_000 + conduit.crashes - len(failed)
    assert all(validate_transition_log(log) for log in conduit.transition_logs().values())


def test_crashing_twice_fails_the_sample():
    conduit = SimulatedConduit(1, duration=1.0, crash_rate=0.999999, seed=1).start()
    conduit.register("a", ModelBinding.in_process(models.quadratic))
    sample = _samples("a", 1)[0]
    conduit.submit("a", [sample])
    outcomes = _drain(conduit)
    assert len(outcomes) == 1
    assert outcomes[0].failed
    assert sample.attempts == 2


def test_simulated_runs_are_reproducible():
    def run():
        conduit = SimulatedConduit(4, duration=lambda s: 0.1 * (1 + int(s.sample_id[2:]) % 3), crash_rate=0.05,
                                   seed=11).start()
        conduit.register("a", ModelBinding.in_process(models.parabola))
        conduit.submit("a", _samples("a", 50))
        _drain(conduit)
        return conduit.assignment_log

    assert run() == run()


def test_wait_respects_timeout():
    conduit = SimulatedConduit(1, duration=10.0).start()
    conduit.register("a", ModelBinding.in_process(models.parabola))
    conduit.submit("a", _samples("a", 1))
    conduit.dispatch_step()
    conduit.wait(2.0)
    assert conduit.collect() == []
    assert conduit.now() == pytest.approx(2.0)
    conduit.wait(None)
    assert len(conduit.collect()) == 1


def test_unknown_mode():
    with pytest.raises(ValueError):
        conduit_start(1, mode="carrier-pigeon")
