"""
Computational models used by the test-suite.

They live at module level so that worker processes can import them by name.
"""

import os

MARKER_ENV_VAR = "UQ_TEST_CRASH_MARKER"


def quadratic(sample):
    """F(x) = -sum(x^2), maximum 0 at the origin."""
    sample["F(x)"] = -sum(x * x for x in sample["Parameters"])


def parabola(sample):
    """F(x) = -(x - 3)^2, maximum 0 at x = 3."""
    x = sample["Variables"]["X"]
    sample["F(x)"] = -(x - 3.0) ** 2


def shifted_parabola(sample):
    """Strictly increasing transform of ``parabola``."""
    x = sample["Variables"]["X"]
    sample["F(x)"] = 2.0 * -(x - 3.0) ** 2 + 7.0


def standard_normal_density(sample):
    x = sample["Variables"]["X"]
    sample["logP(x)"] = -0.5 * x * x


def normal_mean(sample):
    """Forward model of a Normal mean with known unit noise: one evaluation per datum."""
    theta = sample["Variables"]["Theta"]
    sample["Reference Evaluations"] = [theta] * 5
    sample["Standard Deviation"] = [1.0] * 5


def returns_result(sample):
    return {"F(x)": 1.5}


def missing_key(sample):
    sample["Something Else"] = 1.0


def broken(sample):
    raise RuntimeError("model exploded")


def crash_once(sample):
    """Kill the worker process the first time it sees a sample, succeed afterwards."""
    marker = os.path.join(os.environ[MARKER_ENV_VAR], f"{sample['Sample Id']}.seen")
    if not os.path.exists(marker):
        with open(marker, "w") as handle:
            handle.write("seen")
        os._exit(17)
    sample["F(x)"] = 1.0


def always_crash(sample):
    os._exit(17)


def report_worker(sample):
    sample["F(x)"] = float(os.environ.get("KORALI_WORKER_ID", "-1"))


def scalar_deviation(sample):
    """Writes a bare number where a list of standard deviations belongs."""
    theta = sample["Variables"]["Theta"]
    sample["Reference Evaluations"] = [theta] * 5
    sample["Standard Deviation"] = 1.0
