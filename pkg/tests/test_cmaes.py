import numpy as np
import pytest

from UQ_Engine_Helper.cmaes import CmaesSolver, cmaes_check_termination, recombination_weights
from UQ_Engine_Helper.config_validator import config_validate
from UQ_Engine_Helper.distributions import NEG_INF
from UQ_Engine_Helper.exceptions import DegenerateCovarianceError, NonFiniteObjectiveCountError
from UQ_Engine_Helper.problems import Evaluation
from UQ_Engine_Helper.solver_base import TerminationCriteria
from UQ_Engine_Helper.variables import VariableSpace

from tests.conftest import optimization_config


def _solver(seed=1234, **overrides):
    tree = config_validate(optimization_config(seed=seed, **overrides))
    space = VariableSpace.from_config(tree)
    return CmaesSolver(tree["Solver"], space, tree["Random Seed"])


def _run(solver, objective, generations):
    for _ in range(generations):
        candidates = solver.generate()
        solver.update([Evaluation(objective(x)) for x in candidates])


def parabola(x):
    return -float((x[0] - 3.0) ** 2)


def test_recombination_weights_for_two_parents():
    weights = recombination_weights(2)
    assert weights == pytest.approx([0.804183, 0.195817], abs=1e-4)
    assert weights.sum() == pytest.approx(1.0)


def test_weights_are_decreasing_and_positive():
    weights = recombination_weights(10)
    assert np.all(weights > 0)
    assert np.all(np.diff(weights) < 0)


def test_strategy_defaults():
    solver = _solver()
    assert solver.lam == 8
    assert solver.mu == 4
    assert 0 < solver.cs < 1
    assert 0 < solver.c1 + solver.cmu <= 1


def test_draws_are_standard_normal_at_unit_setup():
    tree = optimization_config(population=2)
    tree["Variables"] = [{"Name": "X", "Initial Value": 0.0, "Initial Standard Deviation": 1.0}]
    validated = config_validate(tree)
    solver = CmaesSolver(validated["Solver"], VariableSpace.from_config(validated), 5)
    draws = np.array([solver._sample_one()[0] for _ in range(100000)])
    assert draws.mean() == pytest.approx(0.0, abs=0.02)
    assert draws.std() == pytest.approx(1.0, abs=0.02)


def test_converges_on_parabola():
    solver = _solver()
    _run(solver, parabola, 200)
    assert abs(solver.mean[0] - 3.0) < 1e-6
    value, params = solver.best()
    assert value == pytest.approx(0.0, abs=1e-10)
    assert params[0] == pytest.approx(3.0, abs=1e-5)


def test_invariant_under_monotone_transform():
    a, b = _solver(seed=77), _solver(seed=77)
    _run(a, parabola, 25)
    _run(b, lambda x: 5.0 * parabola(x) + 11.0, 25)
    assert np.array_equal(a.mean, b.mean)
    assert a.sigma == b.sigma


def test_candidates_respect_bounds():
    solver = _solver()
    solver.sigma = 50.0
    for x in solver.generate():
        assert -10.0 <= x[0] <= 10.0


def test_rejected_candidates_rank_last():
    solver = _solver()
    candidates = solver.generate()
    evaluations = [Evaluation(NEG_INF if i % 2 else parabola(x)) for i, x in enumerate(candidates)]
    solver.update(evaluations)
    assert np.isfinite(solver.best_value)


def test_all_rejected_raises():
    solver = _solver()
    solver.generate()
    with pytest.raises(NonFiniteObjectiveCountError):
        solver.update([Evaluation.rejected()] * solver.lam)


def test_update_needs_matching_evaluations():
    solver = _solver()
    solver.generate()
    with pytest.raises(ValueError):
        solver.update([Evaluation(0.0)])


def test_state_round_trip_continues_identically():
    original = _solver(seed=9)
    _run(original, parabola, 5)
    restored = _solver(seed=9)
    restored.load_state_dict(original.state_dict())
    _run(original, parabola, 5)
    _run(restored, parabola, 5)
    assert np.array_equal(original.mean, restored.mean)
    assert original.state_dict() == restored.state_dict()


def test_termination_order_and_reasons():
    solver = _solver()
    assert cmaes_check_termination(solver, TerminationCriteria()) is None
    assert "Max Generations" in cmaes_check_termination(solver, TerminationCriteria(max_generations=0))

    solver.best_value = 1.0
    assert "Target Value" in cmaes_check_termination(solver, TerminationCriteria(target_value=0.5))

    solver.sigma = 1e-12
    assert "Step size" in cmaes_check_termination(solver, TerminationCriteria(min_step_size=1e-9))

    solver.generation_best = [1.0, 1.0 + 1e-12, 1.0]
    criteria = TerminationCriteria(min_value_difference=1e-9, value_window=3)
    assert "Min Value Difference" in cmaes_check_termination(solver, criteria)


def test_value_window_needs_enough_generations():
    solver = _solver()
    solver.generation_best = [1.0, 1.0]
    assert cmaes_check_termination(solver, TerminationCriteria(min_value_difference=1e-9, value_window=3)) is None


def _two_dimensional_solver():
    tree = optimization_config()
    tree["Variables"].append({"Name": "Y", "Initial Value": 0.0, "Initial Standard Deviation": 1.0})
    validated = config_validate(tree)
    return CmaesSolver(validated["Solver"], VariableSpace.from_config(validated), 3)


def test_ill_conditioned_covariance_is_reconditioned():
    solver = _two_dimensional_solver()
    solver.C = np.diag([1e-20, 1.0])
    solver._update_eigensystem()
    assert solver.D.min() ** 2 >= 1e-14 * 0.99
    assert solver.D.max() ** 2 == pytest.approx(1.0)


def test_degenerate_covariance_raises():
    solver = _two_dimensional_solver()
    solver.C = np.zeros((2, 2))
    with pytest.raises(DegenerateCovarianceError):
        solver._update_eigensystem()


def negative_rosenbrock(x):
    return -float(100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2)


def _rosenbrock_solver(seed):
    tree = optimization_config(population=16, generations=500, seed=seed)
    tree["Variables"] = [
        {"Name": name, "Lower Bound": -5.0, "Upper Bound": 5.0, "Initial Value": 0.0,
         "Initial Standard Deviation": 1.0}
        for name in ("X", "Y")
    ]
    validated = config_validate(tree)
    return CmaesSolver(validated["Solver"], VariableSpace.from_config(validated), validated["Random Seed"])


def _reaches_optimum(solver, objective, generations=500):
    for _ in range(generations):
        _run(solver, objective, 1)
        if solver.best()[0] > -1e-6:
            return True
    return False


def test_parabola_reaches_optimum_for_most_seeds():
    reached = sum(_reaches_optimum(_solver(seed=seed), parabola) for seed in range(10))
    assert reached >= 9


def test_rosenbrock_reaches_optimum_for_most_seeds():
    reached = sum(_reaches_optimum(_rosenbrock_solver(seed), negative_rosenbrock) for seed in range(10))
    assert reached >= 9


def _sphere_solver(dimension, seed):
    tree = optimization_config(population=4 + int(3 * np.log(dimension)), generations=2000, seed=seed)
    tree["Variables"] = [
        {"Name": f"X{i}", "Lower Bound": -10.0, "Upper Bound": 10.0, "Initial Value": 2.0,
         "Initial Standard Deviation": 1.0}
        for i in range(dimension)
    ]
    validated = config_validate(tree)
    return CmaesSolver(validated["Solver"], VariableSpace.from_config(validated), validated["Random Seed"])


@pytest.mark.parametrize("dimension", [1, 2, 3, 5])
def test_best_value_on_sphere_never_decreases(dimension):
    def sphere(x):
        return -float(np.sum(np.square(x)))

    for seed in range(10):
        solver = _sphere_solver(dimension, seed)
        history = []
        for _ in range(2000):
            _run(solver, sphere, 1)
            history.append(solver.best()[0])
            if history[-1] > -1e-11:
                break
        assert all(b >= a for a, b in zip(history, history[1:]))
        assert history[-1] > -1e-10
