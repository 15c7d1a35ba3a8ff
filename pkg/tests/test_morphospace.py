import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synmorph.features import FEATURES, FeatureMatrix, neighbor_stats, standardize
from synmorph.metrics import primary_matrix
from synmorph.morphospace import (
    JacobiError, MorphospaceModel, ScoreMatrix, covariance, cross_project, fit_pca, jacobi_eigh,
    project, rgb_colors,
)


def check_identities(x, model):
    c = covariance(x)
    L, lam = model.loadings, model.eigenvalues
    assert np.abs(L.T @ L - np.eye(len(lam))).max() <= 1e-9
    assert abs(lam.sum() - np.trace(c)) <= 1e-8
    assert np.abs(L @ np.diag(lam) @ L.T - c).max() <= 1e-8
    sc = covariance(x @ L)
    assert np.abs(sc - np.diag(lam)).max() <= 1e-8
    assert (np.diff(lam) <= 0).all() and lam[-1] >= -1e-9
    for j in range(L.shape[1]):
        assert L[np.argmax(np.abs(L[:, j])), j] > 0


def test_jacobi_matches_numpy():
    rng = np.random.default_rng(0)
    for _ in range(5):
        b = rng.normal(size=(12, 12))
        a = b + b.T
        w, v = jacobi_eigh(a)
        np.testing.assert_allclose(np.sort(w), np.linalg.eigvalsh(a), atol=1e-10)
        np.testing.assert_allclose(v @ np.diag(w) @ v.T, a, atol=1e-10)


def test_jacobi_non_convergence_raises():
    a = np.random.default_rng(1).normal(size=(8, 8))
    with pytest.raises(JacobiError):
        jacobi_eigh(a + a.T, max_sweeps=1)


def test_perfectly_correlated_columns():
    x = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    m = fit_pca(x)
    np.testing.assert_allclose(m.loadings[:, 0], [2 ** -0.5, 2 ** -0.5], atol=1e-12)
    assert abs(m.eigenvalues[1]) <= 1e-12
    s = project(m, x - x.mean(axis=0))
    np.testing.assert_allclose(s.values[:, 1], 0.0, atol=1e-12)


def test_isotropic_reconstruction():
    x = np.vstack([np.eye(4), -np.eye(4)]) * np.sqrt(7 / 2)
    m = fit_pca(x)
    np.testing.assert_allclose(m.eigenvalues, 1.0, atol=1e-12)
    check_identities(x, m)


def test_random_identities():
    rng = np.random.default_rng(42)
    for _ in range(3):
        x = rng.normal(size=(100, 45)) @ rng.normal(size=(45, 45))
        check_identities(x, fit_pca(x))


def test_rank_deficient_identities():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(30, 5)) @ rng.normal(size=(5, 12))
    check_identities(x, fit_pca(x))


def test_zero_row_projects_to_origin():
    m = fit_pca(np.random.default_rng(2).normal(size=(20, 6)))
    assert (project(m, np.zeros(6)).values == 0).all()


def test_projection_column_mismatch():
    m = fit_pca(np.random.default_rng(2).normal(size=(20, 6)))
    with pytest.raises(ValueError):
        project(m, np.zeros((2, 5)))


def test_fit_is_bitwise_deterministic():
    x = np.random.default_rng(5).normal(size=(50, 10))
    a, b = fit_pca(x), fit_pca(x)
    assert np.array_equal(a.eigenvalues, b.eigenvalues) and np.array_equal(a.loadings, b.loadings)


@pytest.fixture(scope="module")
def graph_model(random_graphs):
    g = random_graphs[0]
    raw = neighbor_stats(g, primary_matrix(g))
    z, s = standardize(raw)
    return raw, z, fit_pca(z, s)


def test_graph_features_model(graph_model):
    raw, z, m = graph_model
    check_identities(z.values, m)
    assert m.columns == FEATURES
    np.testing.assert_allclose(project(m, z).values.var(axis=0, ddof=1), m.eigenvalues, atol=1e-8)


def test_projection_isometry(graph_model):
    _, z, m = graph_model
    s = project(m, z).values
    np.testing.assert_allclose((s ** 2).sum(axis=1), (z.values ** 2).sum(axis=1), atol=1e-8)


def test_cross_project_self_and_centre(graph_model):
    raw, z, m = graph_model
    assert np.array_equal(cross_project(m, raw).values, project(m, z).values)
    centre = FeatureMatrix(raw.keys[:1], m.standardizer.mean[None, :].copy())
    np.testing.assert_allclose(cross_project(m, centre).values, 0.0, atol=1e-12)


def test_model_json_round_trip(graph_model):
    _, z, m = graph_model
    buf = io.StringIO()
    m.dump(buf)
    data = json.loads(buf.getvalue())
    assert data["loadings"]["rows"] == list(FEATURES) and data["loadings"]["cols"][0] == "PC1"
    back = MorphospaceModel.from_json(data)
    assert np.array_equal(back.loadings, m.loadings) and np.array_equal(back.eigenvalues, m.eigenvalues)
    assert np.array_equal(project(back, z).values, project(m, z).values)


def test_scores_csv(graph_model):
    _, z, m = graph_model
    s = project(m, z)
    buf = io.StringIO()
    s.write_csv(buf, n_components=3)
    assert buf.getvalue().splitlines()[0] == "surface,upos,PC1,PC2,PC3"
    back = ScoreMatrix.read_csv(io.StringIO(buf.getvalue()))
    assert np.array_equal(back.values, s.values[:, :3])


def test_rgb_extremes():
    scores = np.array([[5.0, -1.0, -2.0, 9.0], [0.0, 3.0, 4.0, 9.0], [1.0, 0.0, 0.0, 9.0]])
    rgb = rgb_colors(scores)
    assert rgb[0].tolist() == [1.0, 0.0, 0.0]
    assert ((rgb >= 0) & (rgb <= 1)).all()


def test_rgb_two_points_and_constant_channel():
    rgb = rgb_colors(np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 2.0]]))
    assert rgb.tolist() == [[0.0, 1.0, 0.5], [1.0, 0.0, 0.5]]
    with pytest.raises(ValueError):
        rgb_colors(np.zeros((1, 3)))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 40), st.integers(1, 10), st.integers(0, 2 ** 32 - 1))
def test_identities_property(n, p, seed):
    x = np.random.default_rng(seed).normal(size=(n, p))
    check_identities(x, fit_pca(x))
