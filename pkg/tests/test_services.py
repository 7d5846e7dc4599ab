import numpy as np
import pytest

from conftest import relative_error
from pairlearn.config.settings import Settings
from pairlearn.data.models import DatasetBundle, GridRecord
from pairlearn.learning import holdout, online
from pairlearn.lib.errors import PairlearnError
from pairlearn.lib.kernels import FeatureMatrix, default_ids, make_kernel, make_labels, rescore_labels
from pairlearn.lib.metrics import parse_metric
from pairlearn.services.base import ServiceContext, execute
from pairlearn.services.evaluation_service import EvaluationService, GridSpec, parse_grid, select_best
from pairlearn.services.online_service import OnlineRequest, OnlineService
from pairlearn.services.training_service import FitRequest, TrainingService


def _ctx(threads: int = 1) -> ServiceContext:
    return ServiceContext.from_settings(Settings(threads=threads, event_log_enabled=False))


def _bundle(problem) -> DatasetBundle:
    return DatasetBundle(problem.labels, problem.instance_kernel, problem.task_kernel)


def test_parse_grid_forms() -> None:
    default = parse_grid("1e-7:1e6:decade")
    assert len(default.lambda_values) == 14
    assert default.lambda_values[0] == pytest.approx(1e-7)
    assert default.lambda_values[-1] == pytest.approx(1e6)
    assert parse_grid("10, 0.1,1").lambda_values == (0.1, 1.0, 10.0)
    assert not parse_grid("1", joint=False).joint
    for text in ("1:10:octave", "a,b"):
        with pytest.raises(PairlearnError) as error:
            parse_grid(text)
        assert error.value.code == "USAGE"
    with pytest.raises(PairlearnError) as invalid:
        GridSpec(lambda_values=(1.0, 0.5))
    assert invalid.value.code == "INVALID_PARAMETER"
    with pytest.raises(PairlearnError) as negative:
        parse_grid("-1,1")
    assert negative.value.code == "INVALID_PARAMETER"


def test_select_best_breaks_ties_toward_larger_lambdas() -> None:
    records = [GridRecord(0.1, 10.0, None, 0.5), GridRecord(10.0, 0.1, None, 0.5), GridRecord(1.0, 1.0, None, 0.4)]
    assert select_best(records, parse_metric("micro-auc")) == records[1]
    assert select_best(records, parse_metric("mse")) == records[2]
    assert select_best([], parse_metric("mse")) is None


def test_two_step_grid_covers_the_product_grid(make_problem) -> None:
    problem = make_problem(51, 20, 15, binary=True)
    report = EvaluationService(_ctx(threads=4)).grid(_bundle(problem), "ts", "B", parse_grid("1e-7:1e6:decade"))
    assert len(report.grid) == 196
    pairs = [(record.lambda_d, record.lambda_t) for record in report.grid]
    assert pairs == sorted(pairs)
    assert report.best is not None
    assert report.best.score == max(record.score for record in report.grid)
    assert report.metric == "macro-auc-rows"


def test_grid_scores_match_single_loo_runs(make_problem) -> None:
    problem = make_problem(52, 6, 5, binary=True)
    service = EvaluationService(_ctx())
    report = service.grid(_bundle(problem), "ts", "D", parse_grid("0.1,1"), metric="mse")
    for record in report.grid:
        single = service.loo(_bundle(problem), "ts", "D", record.lambda_d, record.lambda_t, metric="mse")
        assert single.score == pytest.approx(record.score, rel=1e-12)


def test_oracle_and_shortcut_scores_agree(make_problem) -> None:
    problem = make_problem(53, 5, 4, binary=True)
    service = EvaluationService(_ctx())
    for setting in ("A", "B", "C", "D"):
        fast = service.loo(_bundle(problem), "ts", setting, 0.5, 2.0, metric="mse")
        slow = service.loo(_bundle(problem), "ts", setting, 0.5, 2.0, metric="mse", oracle=True)
        assert fast.score == pytest.approx(slow.score, rel=1e-8)


def test_loo_reports_suspects(make_problem) -> None:
    problem = make_problem(54, 5, 4, binary=True)
    outcome = EvaluationService(_ctx()).loo(_bundle(problem), "ts", "A", 1.0, 1.0, suspects=3)
    assert len(outcome.suspects) == 3
    residuals = [abs(item.residual) for item in outcome.suspects]
    assert residuals == sorted(residuals, reverse=True)
    assert outcome.metric.kind == "micro_auc"


def test_fit_predict_round_trip(tmp_path, make_problem) -> None:
    problem = make_problem(55, 5, 3)
    service = TrainingService(_ctx())
    bundle = _bundle(problem)
    outcome = service.fit(bundle, FitRequest(variant="kk", lam=0.5))
    params_path, sidecar_path, report_path = service.save(bundle, outcome, tmp_path / "kk")
    assert report_path.name == "kk.report.json"

    k_file = tmp_path / "k_test.csv"
    g_file = tmp_path / "g_test.csv"
    k_file.write_text("id,d2,d0,d1,d3,d4\nnew,0.1,0.2,0.3,0.4,0.5\n", encoding="utf-8")
    g_file.write_text("id,t0,t1,t2\nfresh,1,0,0.5\n", encoding="utf-8")
    prediction = service.predict(sidecar_path, k_file, g_file)
    k_row = np.array([[0.2, 0.3, 0.1, 0.4, 0.5]])
    g_row = np.array([[1.0, 0.0, 0.5]])
    np.testing.assert_allclose(prediction.values, k_row @ outcome.model.params @ g_row.T, rtol=1e-12)
    assert prediction.instance_ids == ("new",)
    assert prediction.task_ids == ("fresh",)


def test_fit_requires_impute_for_missing_cells(make_problem) -> None:
    problem = make_problem(56, 4, 3)
    values = problem.labels.values.copy()
    values[3, 2] = np.nan
    partial = make_labels(problem.labels.instance_ids, problem.labels.task_ids, values, allow_missing=True)
    bundle = DatasetBundle(partial, problem.instance_kernel, problem.task_kernel)
    service = TrainingService(_ctx())
    with pytest.raises(PairlearnError) as error:
        service.fit(bundle, FitRequest(variant="ts"))
    assert error.value.code == "INVALID_LABELS"
    outcome = service.fit(bundle, FitRequest(variant="ts", impute=True))
    assert outcome.imputed_cells == 1
    assert outcome.labels.is_complete


def test_online_service_single_batch_equals_batch_fit() -> None:
    rng = np.random.default_rng(57)
    phi, psi = rng.normal(size=(20, 4)), rng.normal(size=(6, 3))
    values = (rng.random((20, 6)) < 0.5).astype(float)
    instance_ids, task_ids = default_ids("d", 20), default_ids("t", 6)
    labels = make_labels(instance_ids, task_ids, values)
    outcome = OnlineService(_ctx()).run(
        FeatureMatrix(instance_ids, ("a", "b", "c", "e"), phi),
        FeatureMatrix(task_ids, ("x", "y", "z"), psi),
        labels,
        OnlineRequest(batch_size=100, test_fraction=0.25, metric="mse"),
    )
    assert len(outcome.curve) == 1
    assert outcome.n_test == 5
    assert outcome.batch_gap == 0.0
    train = np.sort(np.setdiff1d(np.arange(20), np.random.default_rng(0).permutation(20)[:5]))
    reference = online.init_primal(phi[train], psi, values[train], 1.0, 1.0)
    assert relative_error(outcome.model.weights, reference.weights) < 1e-8


def test_online_service_batches_grow_the_model() -> None:
    rng = np.random.default_rng(58)
    phi, psi = rng.normal(size=(12, 3)), rng.normal(size=(30, 4))
    values = rng.normal(size=(12, 30))
    instance_ids, task_ids = default_ids("d", 12), default_ids("t", 30)
    outcome = OnlineService(_ctx()).run(
        FeatureMatrix(instance_ids, ("a", "b", "c"), phi),
        FeatureMatrix(task_ids, ("w", "x", "y", "z"), psi),
        make_labels(instance_ids, task_ids, values),
        OnlineRequest(batch_size=5, stream="tasks", test_fraction=0.2, metric="c-index"),
    )
    assert [row.n_tasks for row in outcome.curve] == [5, 10, 15, 20, 24]
    assert all(row.n_instances == 12 for row in outcome.curve)
    assert outcome.batch_gap <= 1e-6


def test_execute_turns_errors_into_envelopes() -> None:
    ctx = _ctx()

    def fail() -> None:
        raise PairlearnError("DENOMINATOR_UNDERFLOW", "tiny", detail="d3")

    result = execute(ctx, "loo", fail)
    assert result.data is None
    assert result.error is not None
    assert (result.error.code, result.error.category, result.error.exit_code) == ("DENOMINATOR_UNDERFLOW", "numeric", 3)
    ok = execute(ctx, "fit", lambda: 42)
    assert ok.data == 42 and ok.error is None
    snapshot = ctx.metrics.snapshot()
    assert snapshot.total_commands == 2
    assert snapshot.failure_rate == pytest.approx(0.5)


def test_unknown_model_is_a_usage_error(make_problem) -> None:
    problem = make_problem(59, 3, 2)
    with pytest.raises(PairlearnError) as error:
        TrainingService(_ctx()).fit(_bundle(problem), FitRequest(variant="svm"))
    assert error.value.code == "USAGE"
    assert holdout.check_setting(" b ") == "B"


def test_rescored_mse_is_measured_on_the_fitted_scale() -> None:
    labels = make_labels(["a", "b", "c"], ["x", "y"], [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    bundle = DatasetBundle(labels, make_kernel(["a", "b", "c"], np.eye(3)), make_kernel(["x", "y"], np.eye(2)))
    service = EvaluationService(_ctx())
    rescored = rescore_labels(labels).values
    outcome = service.loo(bundle, "ts", "D", metric="mse", rescore=True)
    np.testing.assert_allclose(outcome.result.predictions, 0.0, atol=1e-12)
    assert outcome.score == pytest.approx(float(np.mean(rescored**2)))
    report = service.grid(bundle, "ts", "D", parse_grid("1"), metric="mse", rescore=True)
    assert report.grid[0].score == pytest.approx(outcome.score)
    ranked = service.loo(bundle, "ts", "A", metric="micro-auc", rescore=True)
    plain = service.loo(bundle, "ts", "A", metric="micro-auc")
    assert ranked.score == pytest.approx(plain.score)
