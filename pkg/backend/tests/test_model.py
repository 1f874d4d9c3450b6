import math

import numpy as np
import pytest
from scipy import integrate

from repmix.errors import DatasetNotFoundError, InputError
from repmix.model import (
    Component,
    Dataset,
    MixtureState,
    eval_mixture_density,
    mixture_log_density,
    sample_base,
    validate_config,
)
from repmix.schemas import BasePrior, Combiner, MixtureConfig, PriorOverrides


def _state(weights, means, sds):
    components = [Component(np.atleast_1d(mu), np.atleast_1d(sd) ** 2) for mu, sd in zip(means, sds)]
    return MixtureState.from_components(weights, components)


def test_density_standard_normal_mode():
    state = _state([1.0], [0.0], [1.0])
    assert eval_mixture_density(state, [0.0]) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-12)


def test_density_identical_components():
    state = _state([0.5, 0.5], [0.0, 0.0], [1.0, 1.0])
    assert eval_mixture_density(state, [0.0]) == pytest.approx(0.398942, abs=1e-6)


def test_density_scale_mixture():
    state = _state([0.7, 0.3], [0.0, 0.0], [0.2, 2.0])
    expected = 0.7 / (0.2 * math.sqrt(2 * math.pi)) + 0.3 / (2 * math.sqrt(2 * math.pi))
    assert eval_mixture_density(state, [0.0]) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(1.456139, abs=1e-6)


def test_density_dimension_mismatch():
    state = _state([1.0], [0.0], [1.0])
    with pytest.raises(InputError):
        eval_mixture_density(state, [0.0, 1.0])


def test_density_integrates_to_one_1d():
    state = _state([0.2, 0.5, 0.3], [-3.0, 0.0, 4.0], [0.5, 1.0, 2.0])
    total, _ = integrate.quad(lambda y: eval_mixture_density(state, [y]), -30.0, 30.0, limit=200, epsabs=1e-12)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_density_integrates_to_one_2d():
    weights = np.array([0.6, 0.4])
    means = np.array([[0.0, 0.0], [2.0, -1.0]])
    variances = np.array([[1.0, 0.5], [0.3, 2.0]])
    axis_x = np.linspace(-12.0, 14.0, 1301)
    axis_y = np.linspace(-16.0, 14.0, 1501)
    grid_x, grid_y = np.meshgrid(axis_x, axis_y, indexing="ij")
    points = np.stack([grid_x.reshape(-1), grid_y.reshape(-1)], axis=1)
    values = np.exp(mixture_log_density(weights, means, variances, points)).reshape(grid_x.shape)
    total = np.trapezoid(np.trapezoid(values, axis_y, axis=1), axis_x)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_density_permutation_invariant():
    state = _state([0.2, 0.5, 0.3], [-3.0, 0.0, 4.0], [0.5, 1.0, 2.0])
    order = [2, 0, 1]
    swapped = MixtureState.from_components(state.weights[order], [state.components[h] for h in order])
    for y in (-2.0, 0.3, 5.0):
        assert eval_mixture_density(swapped, [y]) == pytest.approx(eval_mixture_density(state, [y]), rel=1e-14)


def test_density_continuous_in_parameters():
    base = eval_mixture_density(_state([1.0], [0.0], [1.0]), [0.5])
    nudged = eval_mixture_density(_state([1.0], [1e-6], [1.0]), [0.5])
    # d f / d mu at y = 0.5 equals 0.5 * phi(0.5)
    assert abs(nudged - base) == pytest.approx(1e-6 * 0.5 * base, rel=1e-3)


def test_validate_config_ok():
    assert validate_config(MixtureConfig.symmetric(6, 1), BasePrior.standard(1)) == []


def test_validate_config_alpha_bound_warning():
    violations = validate_config(MixtureConfig(k=3, m=1, alpha=(0.6, 0.6, 0.6)), BasePrior.standard(1))
    assert [v.code for v in violations] == ["alpha_bound"]
    assert violations[0].severity == "warning"
    assert "alpha exceeds m/2" in violations[0].message


def test_validate_config_variance_shape():
    violations = validate_config(MixtureConfig.symmetric(6, 1), BasePrior.standard(1, a0=0.5))
    assert any(v.code == "variance_shape" and v.severity == "error" for v in violations)
    assert any("variance prior shape" in v.message for v in violations)


def test_validate_config_reports_every_violation():
    prior = BasePrior(m0=(0.0,), v0=(-1.0,), a0=0.5, b0=(0.0,))
    codes = {v.code for v in validate_config(MixtureConfig(k=2, m=2, alpha=(1.0, 1.0)), prior)}
    assert codes == {"dimension", "alpha_bound", "variance_shape", "mean_variance", "variance_scale"}


def test_component_rejects_bad_variance():
    with pytest.raises(InputError):
        Component(np.array([0.0]), np.array([0.0]))
    with pytest.raises(InputError):
        Component(np.array([0.0, 1.0]), np.array([1.0]))


def test_state_check_weights_simplex():
    state = _state([0.5, 0.6], [0.0, 1.0], [1.0, 1.0])
    with pytest.raises(InputError):
        state.check()
    _state([0.4, 0.6], [0.0, 1.0], [1.0, 1.0]).check()


def test_slice_values_by_combiner():
    state = _state([0.5, 0.3, 0.2], [0.0, 1.0, 2.0], [1.0, 1.0, 1.0])
    assert state.slice.values.tolist() == [0.0]
    state.slice.combiner = Combiner.PRODUCT
    assert state.slice.values.tolist() == [0.0, 0.0, 0.0]


def test_dataset_from_csv_with_labels(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("y1,y2,label\n0.5,1.0,0\n-1.0,2.5,1\n3.0,0.0,1\n", encoding="utf-8")
    dataset = Dataset.from_csv(path)
    assert dataset.n == 3 and dataset.m == 2
    assert dataset.labels.tolist() == [0, 1, 1]
    assert dataset.name == "data"
    assert dataset.to_frame().columns.tolist() == ["y1", "y2", "label"]


def test_dataset_from_csv_without_header(tmp_path):
    path = tmp_path / "plain.csv"
    path.write_text("9.172\n9.350\n9.483\n", encoding="utf-8")
    dataset = Dataset.from_csv(path)
    assert dataset.values[:, 0].tolist() == [9.172, 9.350, 9.483]
    assert dataset.labels is None


def test_dataset_rejects_missing_values(tmp_path):
    path = tmp_path / "holes.csv"
    path.write_text("y1,y2\n1.0,\n2.0,3.0\n", encoding="utf-8")
    with pytest.raises(InputError):
        Dataset.from_csv(path)


@pytest.mark.parametrize("rows", ["y1,label\n0.5,a\n1.0,b\n", "y1,label\n0.5,1.5\n1.0,0\n"])
def test_dataset_rejects_bad_labels(tmp_path, rows):
    path = tmp_path / "labels.csv"
    path.write_text(rows, encoding="utf-8")
    with pytest.raises(InputError):
        Dataset.from_csv(path)


def test_prior_override_length_mismatch():
    with pytest.raises(InputError):
        BasePrior.standard(2).with_overrides(PriorOverrides(m0=(0.0, 1.0, 2.0)))


def test_dataset_missing_file(tmp_path):
    with pytest.raises(DatasetNotFoundError) as info:
        Dataset.from_csv(tmp_path / "absent.csv")
    assert info.value.exit_code == 2


def test_dataset_rejects_non_finite():
    with pytest.raises(InputError):
        Dataset(values=np.array([[1.0], [np.nan]]))


def test_sample_base_shapes(rng):
    prior = BasePrior(m0=(0.0, 5.0), v0=(1.0, 4.0), a0=3.0, b0=(1.0, 2.0))
    means, variances = sample_base(prior, 4, rng)
    assert means.shape == variances.shape == (4, 2)
    batched_means, batched_vars = sample_base(prior, 4, rng, size=5000)
    assert batched_means.shape == (5000, 4, 2)
    assert np.all(batched_vars > 0)
    # inverse-gamma mean b0 / (a0 - 1)
    assert batched_vars[..., 1].mean() == pytest.approx(1.0, rel=0.05)
    assert batched_means[..., 1].mean() == pytest.approx(5.0, abs=0.05)


def test_draws_frame_layout(make_draws):
    draws = make_draws([[0.6, 0.4], [0.5, 0.5]], [[0.0, 1.0], [0.1, 1.1]], [[1.0, 2.0], [1.0, 2.0]])
    frame = draws.to_frame()
    assert frame.columns.tolist() == ["chain", "iter", "component", "h", "log_h", "weight", "mean_1", "var_1"]
    assert len(frame) == 4
    assert frame["component"].tolist() == [1, 2, 1, 2]
    assert frame["weight"].tolist() == [0.6, 0.4, 0.5, 0.5]
