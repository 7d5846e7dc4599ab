import numpy as np
import pytest

from conftest import relative_error
from pairlearn.learning import holdout
from pairlearn.lib.errors import PairlearnError
from pairlearn.lib.filters import hat_matrix
from pairlearn.lib.kernels import kernel_decomposition, make_kernel, make_labels

COMBINATIONS = [("IT", "A"), ("IT", "B"), ("TS", "A"), ("TS", "B"), ("TS", "C"), ("TS", "D"), ("KK", "A")]


@pytest.mark.parametrize("seed", range(20))
def test_shortcuts_match_retraining(make_problem, seed: int) -> None:
    rng = np.random.default_rng(1000 + seed)
    m, q = int(rng.integers(5, 9)), int(rng.integers(4, 8))
    problem = make_problem(seed, m, q)
    lambda_d, lambda_t, lam = (float(value) for value in rng.choice([0.1, 1.0, 10.0], size=3))
    eig_k = kernel_decomposition(problem.instance_kernel)
    eig_g = kernel_decomposition(problem.task_kernel)
    for variant, setting in COMBINATIONS:
        fast = holdout.shortcut_loo(variant, setting, eig_k, eig_g, problem.labels, lambda_d, lambda_t, lam)
        slow = holdout.brute_force_loo(
            variant,
            setting,
            problem.instance_kernel,
            problem.task_kernel,
            problem.labels,
            lambda_d,
            lambda_t,
            lam,
        )
        assert fast.setting == setting
        assert (fast.lambda_d, fast.lambda_t, fast.lam) == (slow.lambda_d, slow.lambda_t, slow.lam), (variant, setting)
        assert relative_error(fast.predictions, slow.predictions) <= 1e-8, (variant, setting)


def test_held_out_labels_do_not_leak(make_problem) -> None:
    problem = make_problem(42, 6, 5)
    eig_k = kernel_decomposition(problem.instance_kernel)
    eig_g = kernel_decomposition(problem.task_kernel)
    i, j = 2, 3

    def run(setting: str, values: np.ndarray) -> np.ndarray:
        labels = make_labels(problem.labels.instance_ids, problem.labels.task_ids, values)
        return holdout.shortcut_loo("TS", setting, eig_k, eig_g, labels, 0.5, 2.0).predictions

    base = problem.labels.values
    cell = base.copy()
    cell[i, j] += 5.0
    row = base.copy()
    row[i] += 5.0
    col = base.copy()
    col[:, j] += 5.0
    both = row.copy()
    both[:, j] += 5.0
    assert run("A", cell)[i, j] == pytest.approx(run("A", base)[i, j], rel=1e-9, abs=1e-12)
    np.testing.assert_allclose(run("B", row)[i], run("B", base)[i], rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(run("C", col)[:, j], run("C", base)[:, j], rtol=1e-9, atol=1e-12)
    assert run("D", both)[i, j] == pytest.approx(run("D", base)[i, j], rel=1e-9, abs=1e-12)


def test_identity_kernels_give_zero_setting_d_predictions() -> None:
    ids_d, ids_t = ["a", "b", "c"], ["x", "y"]
    labels = make_labels(ids_d, ids_t, [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    hat_k = hat_matrix(kernel_decomposition(make_kernel(ids_d, np.eye(3))), 1.0)
    hat_g = hat_matrix(kernel_decomposition(make_kernel(ids_t, np.eye(2))), 1.0)
    result = holdout.loo_setting_d(hat_k, hat_g, labels.values)
    np.testing.assert_allclose(result.predictions, np.zeros((3, 2)), atol=1e-15)


def test_setting_b_without_task_regularization_equals_independent_tasks(make_problem) -> None:
    problem = make_problem(12, 6, 4)
    hat_k = hat_matrix(kernel_decomposition(problem.instance_kernel), 0.7)
    hat_g = hat_matrix(kernel_decomposition(problem.task_kernel), 0.0)
    two_step = holdout.loo_setting_b(hat_k, hat_g, problem.labels.values)
    independent = holdout.loo_it(hat_k, problem.labels.values)
    assert relative_error(two_step.predictions, independent.predictions) < 1e-8


def test_independent_tasks_share_settings_a_and_b(make_problem) -> None:
    problem = make_problem(13, 5, 3)
    eig_k = kernel_decomposition(problem.instance_kernel)
    eig_g = kernel_decomposition(problem.task_kernel)
    a = holdout.shortcut_loo("IT", "A", eig_k, eig_g, problem.labels, lambda_d=1.0)
    b = holdout.shortcut_loo("IT", "B", eig_k, eig_g, problem.labels, lambda_d=1.0)
    np.testing.assert_array_equal(a.predictions, b.predictions)
    assert (a.setting, b.setting) == ("A", "B")


def test_denominator_underflow_names_the_instance() -> None:
    with pytest.raises(PairlearnError) as error:
        holdout.loo_it(np.array([[1.0, 0.0], [0.0, 0.5]]), np.ones((2, 1)), ["lonely", "other"])
    assert error.value.code == "DENOMINATOR_UNDERFLOW"
    assert error.value.detail == "lonely"


def test_dyad_denominator_underflow_names_instance_and_task() -> None:
    labels = make_labels(["a", "b"], ["x", "y", "z"], np.arange(6.0).reshape(2, 3))
    eig_k = kernel_decomposition(make_kernel(["a", "b"], np.eye(2)))
    eig_g = kernel_decomposition(make_kernel(["x", "y", "z"], np.eye(3)))
    with pytest.raises(PairlearnError) as error:
        holdout.shortcut_loo("KK", "A", eig_k, eig_g, labels, lam=0.0)
    assert error.value.code == "DENOMINATOR_UNDERFLOW"
    assert error.value.detail == "a/x"


def test_two_step_dyad_oracle_needs_positive_lambdas(make_problem) -> None:
    problem = make_problem(18, 3, 3)
    for lambda_d, lambda_t in ((0.0, 1.0), (1.0, 0.0)):
        with pytest.raises(PairlearnError) as error:
            holdout.brute_force_loo(
                "TS", "A", problem.instance_kernel, problem.task_kernel, problem.labels, lambda_d, lambda_t
            )
        assert error.value.code == "INVALID_PARAMETER"
    kronecker = holdout.brute_force_loo(
        "KK", "A", problem.instance_kernel, problem.task_kernel, problem.labels, 1.0, 1.0, lam=0.5
    )
    assert (kronecker.lambda_d, kronecker.lambda_t, kronecker.lam) == (0.0, 0.0, 0.5)


def test_unsupported_combinations(make_problem) -> None:
    problem = make_problem(14, 4, 3)
    eig_k = kernel_decomposition(problem.instance_kernel)
    eig_g = kernel_decomposition(problem.task_kernel)
    for variant, setting in (("IT", "C"), ("IT", "D"), ("KK", "B"), ("OKKLS", "A")):
        with pytest.raises(PairlearnError) as error:
            holdout.shortcut_loo(variant, setting, eig_k, eig_g, problem.labels, 1.0, 1.0, 1.0)
        assert error.value.code == "UNSUPPORTED_COMBINATION"
    with pytest.raises(PairlearnError) as oracle:
        holdout.brute_force_loo("IT", "D", problem.instance_kernel, problem.task_kernel, problem.labels, 1.0)
    assert oracle.value.code == "UNSUPPORTED_COMBINATION"
    with pytest.raises(PairlearnError) as unknown:
        holdout.check_setting("E")
    assert unknown.value.code == "USAGE"


def test_kronecker_oracle_covers_new_entity_settings(make_problem) -> None:
    problem = make_problem(15, 4, 3)
    for setting in ("B", "C", "D"):
        result = holdout.brute_force_loo(
            "KK", setting, problem.instance_kernel, problem.task_kernel, problem.labels, lam=1.0
        )
        assert result.predictions.shape == (4, 3)
        assert np.all(np.isfinite(result.predictions))


def test_brute_force_limits(make_problem) -> None:
    problem = make_problem(16, 5, 4)
    with pytest.raises(PairlearnError) as overflow:
        holdout.brute_force_loo(
            "TS", "B", problem.instance_kernel, problem.task_kernel, problem.labels, 1.0, 1.0, max_dyads=10
        )
    assert overflow.value.code == "SIZE_OVERFLOW"
    single = make_problem(17, 1, 3)
    with pytest.raises(PairlearnError) as empty:
        holdout.brute_force_loo("TS", "B", single.instance_kernel, single.task_kernel, single.labels, 1.0, 1.0)
    assert empty.value.code == "NO_TRAINING_DATA"


def test_suspect_dyads_rank_by_residual() -> None:
    labels = make_labels(["a", "b"], ["x", "y"], [[1.0, 0.0], [0.0, 1.0]])
    result = holdout.LooResult("A", np.array([[0.9, 0.8], [-0.1, 0.5]]), "TS")
    suspects = holdout.suspect_dyads(labels, result, 2)
    assert [(item.instance_id, item.task_id) for item in suspects] == [("a", "y"), ("b", "y")]
    assert suspects[0].residual == pytest.approx(-0.8)
    assert suspects[1].loo_value == pytest.approx(0.5)
    assert holdout.suspect_dyads(labels, result, 0) == []
