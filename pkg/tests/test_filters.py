import numpy as np
import pytest

from conftest import random_psd, relative_error
from pairlearn.lib.errors import PairlearnError
from pairlearn.lib.filters import (
    FilterSpec,
    apply_filter,
    hat_matrix,
    kronecker_tikhonov,
    pairwise_hat_action,
    pairwise_hat_diag,
    tikhonov,
    two_step,
)
from pairlearn.lib.linalg import sym_eig, vec


def test_two_step_filter_is_product_of_tikhonov_filters() -> None:
    rng = np.random.default_rng(0)
    sigma = rng.uniform(0.0, 10.0, 10_000)
    s = rng.uniform(0.0, 10.0, 10_000)
    spec = two_step(0.37, 2.9)
    combined = apply_filter(spec, sigma, s)
    product = apply_filter(tikhonov(0.37), sigma) * apply_filter(tikhonov(2.9), s)
    np.testing.assert_array_equal(combined, product)
    expanded = 1.0 / (sigma * s + 2.9 * sigma + 0.37 * s + 2.9 * 0.37)
    assert float(np.max(np.abs(combined - expanded) / expanded)) <= 1e-14


def test_filter_scalars() -> None:
    assert float(apply_filter(tikhonov(1.0), 3.0)) == pytest.approx(0.25)
    assert float(apply_filter(kronecker_tikhonov(1.0), 3.0, 2.0)) == pytest.approx(1.0 / 7.0)
    assert float(apply_filter(two_step(1.0, 1.0), 1.0, 3.0)) == pytest.approx(1.0 / 8.0)


def test_filter_errors() -> None:
    with pytest.raises(PairlearnError) as zero:
        apply_filter(tikhonov(0.0), np.array([0.0, 1.0]))
    assert zero.value.code == "ZERO_DIVISOR"
    with pytest.raises(PairlearnError) as negative:
        FilterSpec(kind="tikhonov", lam=-1.0)
    assert negative.value.code == "INVALID_PARAMETER"
    with pytest.raises(PairlearnError) as missing:
        apply_filter(kronecker_tikhonov(1.0), 1.0)
    assert missing.value.code == "INVALID_PARAMETER"


def test_hat_matrix_matches_dense_inverse() -> None:
    gram = random_psd(np.random.default_rng(2), 6)
    expected = gram @ np.linalg.inv(gram + 0.5 * np.eye(6))
    assert relative_error(hat_matrix(sym_eig(gram), 0.5), expected) < 1e-10


def test_pairwise_hat_action_two_step_is_kronecker_of_hats() -> None:
    rng = np.random.default_rng(4)
    k, g = random_psd(rng, 5), random_psd(rng, 4)
    labels = rng.normal(size=(5, 4))
    eig_k, eig_g = sym_eig(k), sym_eig(g)
    hat_k, hat_g = hat_matrix(eig_k, 0.4), hat_matrix(eig_g, 1.5)
    action = pairwise_hat_action(eig_k, eig_g, two_step(0.4, 1.5), labels)
    assert relative_error(action, hat_k @ labels @ hat_g) < 1e-10
    diagonal = pairwise_hat_diag(eig_k, eig_g, two_step(0.4, 1.5))
    np.testing.assert_allclose(diagonal, np.outer(np.diag(hat_k), np.diag(hat_g)), rtol=1e-10, atol=1e-14)


def test_pairwise_hat_kronecker_matches_dense_system() -> None:
    rng = np.random.default_rng(8)
    k, g = random_psd(rng, 4), random_psd(rng, 3)
    labels = rng.normal(size=(4, 3))
    pairwise = np.kron(g, k)
    dense_hat = pairwise @ np.linalg.inv(pairwise + 0.7 * np.eye(12))
    eig_k, eig_g = sym_eig(k), sym_eig(g)
    spec = kronecker_tikhonov(0.7)
    action = pairwise_hat_action(eig_k, eig_g, spec, labels)
    assert relative_error(vec(action), dense_hat @ vec(labels)) < 1e-10
    diagonal = pairwise_hat_diag(eig_k, eig_g, spec)
    np.testing.assert_allclose(vec(diagonal), np.diag(dense_hat), rtol=1e-9, atol=1e-13)


def test_pairwise_hat_action_rejects_shape_mismatch() -> None:
    eig = sym_eig(np.eye(3))
    with pytest.raises(PairlearnError) as error:
        pairwise_hat_action(eig, eig, two_step(1.0, 1.0), np.ones((2, 3)))
    assert error.value.code == "DIMENSION_MISMATCH"


@pytest.mark.parametrize("seed", range(20))
def test_hat_diagonals_stay_below_one(seed: int) -> None:
    rng = np.random.default_rng(seed)
    lam = float(rng.choice([0.1, 1.0, 10.0]))
    eig_k = sym_eig(random_psd(rng, int(rng.integers(5, 9))))
    eig_g = sym_eig(random_psd(rng, int(rng.integers(4, 8))))

    instance_diag = np.diag(hat_matrix(eig_k, lam))
    epsilon = lam / (eig_k.max_value + lam) - 1e-12
    assert np.all(instance_diag >= -1e-12)
    assert np.all(instance_diag < 1.0 - epsilon)

    pairwise_diag = pairwise_hat_diag(eig_k, eig_g, kronecker_tikhonov(lam))
    top = eig_k.max_value * eig_g.max_value
    epsilon = lam / (top + lam) - 1e-12
    assert np.all(pairwise_diag >= -1e-12)
    assert np.all(pairwise_diag < 1.0 - epsilon)
