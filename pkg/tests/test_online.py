import numpy as np
import pytest

from conftest import relative_error
from pairlearn.learning import models, online
from pairlearn.lib.errors import PairlearnError
from pairlearn.lib.kernels import default_ids, make_kernel, make_labels


def test_interleaved_batches_match_full_retraining() -> None:
    rng = np.random.default_rng(21)
    phi = rng.normal(size=(60, 8))
    psi = rng.normal(size=(30, 5))
    labels = rng.normal(size=(60, 30))

    model = online.init_primal(phi[:30], psi[:20], labels[:30, :20], 0.5, 2.0)
    for start, stop in ((30, 34), (34, 50), (50, 60)):
        model = online.update_instances(model, phi[start:stop], labels[start:stop, :20])
    for start, stop in ((20, 23), (23, 30)):
        model = online.update_tasks(model, psi[start:stop], labels[:, start:stop])

    reference = online.init_primal(phi, psi, labels, 0.5, 2.0)
    assert (model.n_instances, model.n_tasks) == (60, 30)
    assert relative_error(model.weights, reference.weights) <= 1e-6
    assert relative_error(model.instance_inverse, reference.instance_inverse) <= 1e-6
    assert relative_error(model.task_inverse, reference.task_inverse) <= 1e-6


def test_primal_predictions_match_dual_two_step() -> None:
    rng = np.random.default_rng(22)
    phi, phi_test = rng.normal(size=(12, 4)), rng.normal(size=(3, 4))
    psi, psi_test = rng.normal(size=(7, 3)), rng.normal(size=(2, 3))
    values = rng.normal(size=(12, 7))
    instance_ids, task_ids = default_ids("d", 12), default_ids("t", 7)
    k = make_kernel(instance_ids, phi @ phi.T)
    g = make_kernel(task_ids, psi @ psi.T)
    dual = models.fit_ts(k, g, make_labels(instance_ids, task_ids, values), 0.4, 1.1)
    primal = online.init_primal(phi, psi, values, 0.4, 1.1)

    expected = models.predict(dual, phi_test @ phi.T, psi_test @ psi.T)
    assert relative_error(online.predict_primal_matrix(primal, phi_test, psi_test), expected) <= 1e-6
    assert relative_error(online.dual_to_primal(dual.params, phi, psi), primal.weights) <= 1e-6
    assert online.predict_primal(primal, phi_test[1], psi_test[0]) == pytest.approx(
        float(online.predict_primal_matrix(primal, phi_test, psi_test)[1, 0])
    )


def test_single_instance_updates_use_the_rank_one_path(monkeypatch: pytest.MonkeyPatch) -> None:
    rng = np.random.default_rng(23)
    phi = rng.normal(size=(10, 6))
    psi = rng.normal(size=(4, 2))
    labels = rng.normal(size=(10, 4))
    model = online.init_primal(phi[:5], psi, labels[:5], 1.0, 1.0)
    reference = online.init_primal(phi, psi, labels, 1.0, 1.0)

    def no_factorization(matrix: np.ndarray, what: str) -> np.ndarray:
        raise AssertionError(f"unexpected factorization of {what}")

    monkeypatch.setattr(online, "_spd_inverse", no_factorization)
    for row in range(5, 10):
        model = online.update_instances(model, phi[row : row + 1], labels[row : row + 1])
    assert relative_error(model.weights, reference.weights) <= 1e-8


def test_inverses_stay_symmetric_positive_definite() -> None:
    rng = np.random.default_rng(24)
    phi = rng.normal(size=(40, 5))
    psi = rng.normal(size=(12, 3))
    labels = rng.normal(size=(40, 12))
    model = online.init_primal(phi[:4], psi[:6], labels[:4, :6], 0.1, 0.1)
    for start, stop in ((4, 5), (5, 8), (8, 20), (20, 40)):
        model = online.update_instances(model, phi[start:stop], labels[start:stop, :6])
        assert np.array_equal(model.instance_inverse, model.instance_inverse.T)
        assert np.linalg.eigvalsh(model.instance_inverse).min() > 0
    for start, stop in ((6, 7), (7, 12)):
        model = online.update_tasks(model, psi[start:stop], labels[:, start:stop])
        assert np.array_equal(model.task_inverse, model.task_inverse.T)
        assert np.linalg.eigvalsh(model.task_inverse).min() > 0


def test_scalar_instance_update_matches_hand_computation() -> None:
    model = online.init_primal([[1.0]], [[1.0]], [[2.0]], 1.0, 1.0)
    updated = online.update_instances(model, [[1.0]], [[4.0]])
    assert updated.instance_inverse[0, 0] == pytest.approx(1.0 / 3.0)
    assert updated.weights[0, 0] == pytest.approx(1.0)
    batch = online.init_primal([[1.0], [1.0]], [[1.0]], [[2.0], [4.0]], 1.0, 1.0)
    assert updated.weights[0, 0] == pytest.approx(batch.weights[0, 0])


def test_zero_feature_rows_change_nothing() -> None:
    rng = np.random.default_rng(25)
    phi, psi = rng.normal(size=(6, 3)), rng.normal(size=(5, 2))
    model = online.init_primal(phi, psi, rng.normal(size=(6, 5)), 1.0, 1.0)
    grown = online.update_instances(model, np.zeros((2, 3)), rng.normal(size=(2, 5)))
    np.testing.assert_allclose(grown.weights, model.weights, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(grown.instance_inverse, model.instance_inverse, rtol=1e-12, atol=1e-14)
    single = online.update_instances(model, np.zeros((1, 3)), rng.normal(size=(1, 5)))
    np.testing.assert_allclose(single.weights, model.weights, rtol=1e-12, atol=1e-14)
    widened = online.update_tasks(model, np.zeros((3, 2)), rng.normal(size=(6, 3)))
    np.testing.assert_allclose(widened.weights, model.weights, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(widened.task_inverse, model.task_inverse, rtol=1e-12, atol=1e-14)


def test_online_errors() -> None:
    phi = np.ones((3, 2))
    psi = np.ones((2, 2))
    with pytest.raises(PairlearnError) as regularization:
        online.init_primal(phi, psi, np.ones((3, 2)), 0.0, 1.0)
    assert regularization.value.code == "INVALID_PARAMETER"
    model = online.init_primal(phi, psi, np.ones((3, 2)), 1.0, 1.0)
    with pytest.raises(PairlearnError) as labels:
        online.update_instances(model, np.ones((1, 2)), np.ones((1, 3)))
    assert labels.value.code == "DIMENSION_MISMATCH"
    with pytest.raises(PairlearnError) as features:
        online.update_tasks(model, np.ones((1, 3)), np.ones((3, 1)))
    assert features.value.code == "DIMENSION_MISMATCH"
    with pytest.raises(PairlearnError) as vector:
        online.predict_primal(model, np.ones(3), np.ones(2))
    assert vector.value.code == "DIMENSION_MISMATCH"
