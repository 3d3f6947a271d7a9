import numpy as np
import pytest

from symbreak import _fallback, backend
from symbreak.kernels import CUBIC_GAUSSIAN, RELU, poly
from symbreak.loss import identity_problem, loss, loss_and_grad
from symbreak.optimize import (
    CriticalPointRecord,
    GDConfig,
    NotCriticalError,
    classify,
    gd_run,
    polish_newton,
    refine_symmetric,
    survey,
    xavier_init,
)


def test_xavier_init_is_seeded_and_scaled():
    a, b = xavier_init(40, 50, 3), xavier_init(40, 50, 3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, xavier_init(40, 50, 4))
    assert a.shape == (40, 50)
    assert abs(a.var() * 50 - 1.0) < 0.05
    assert abs(a.mean()) < 0.02
    assert xavier_init(3, 3, 0).shape == (3, 3)  # odd entry count


@pytest.mark.parametrize("bad", [dict(step="adam"), dict(eta=0), dict(beta=1.0), dict(c1=0.7), dict(eps_g=0)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        GDConfig(**bad)


@pytest.mark.parametrize("kind", [poly(3), CUBIC_GAUSSIAN, RELU], ids=str)
def test_gd_reaches_global_minimum_near_identity(kind):
    prob = identity_problem(kind, 4)
    W0 = np.eye(4) + 0.05 * xavier_init(4, 4, 1)
    rec = gd_run(prob, W0, GDConfig(eps_g=1e-9))
    assert rec.converged
    assert rec.loss < 1e-12
    assert rec.grad_norm <= 1e-9


def test_loss_history_is_monotone():
    prob = identity_problem(poly(3), 5)
    rec, hist = gd_run(prob, xavier_init(5, 5, 2), GDConfig(eps_g=1e-8), record_history=True)
    assert rec.converged and len(hist) == rec.iterations + 1
    assert np.all(np.diff(hist) <= 1e-12 * np.maximum(1.0, np.abs(hist[:-1])))


def test_fixed_step_can_diverge():
    prob = identity_problem(poly(3), 3)
    rec = gd_run(prob, 3 * np.ones((3, 3)), GDConfig(step="fixed", eta=10.0, max_iter=1000))
    assert rec.status == "diverged"


def test_max_iter_status():
    prob = identity_problem(poly(3), 3)
    rec = gd_run(prob, xavier_init(3, 3, 0), GDConfig(max_iter=3))
    assert rec.status == "max_iter" and rec.iterations == 3


def test_relu_zero_row_reports_singular():
    prob = identity_problem(RELU, 2)
    rec = gd_run(prob, np.array([[0.0, 0.0], [1.0, 0.2]]))
    assert rec.status == "singular"


@pytest.mark.skipif(backend.NAME != "compiled", reason="compiled core not built")
def test_backends_follow_the_same_path():
    prob = identity_problem(poly(3), 4)
    W0 = xavier_init(4, 4, 5)
    args = (prob.kernel.code, 3, W0, prob.V, prob.c, True, 0.5, 0.5, 1e-4, 200, 1e-10, False)
    a = backend.get("compiled").gd_loop(*args)
    b = _fallback.gd_loop(*args)
    assert a[3] == b[3] and a[4] == b[4]
    assert np.allclose(a[0], b[0], atol=1e-9)


def test_polish_newton_converges_from_perturbation():
    prob = identity_problem(poly(3), 4)
    W = np.eye(4) + 1e-3 * xavier_init(4, 4, 0)
    rec = polish_newton(prob, W, tol=1e-12)
    assert rec.converged and rec.grad_norm <= 1e-12
    assert np.allclose(np.abs(rec.W), np.eye(4), atol=1e-8)


def test_classify_identity_and_saddle():
    prob = identity_problem(poly(3), 3)
    info = classify(prob, np.eye(3))
    assert info["is_second_order_min"] and info["min_eig"] > 0
    # w = (1/d) 11^T is a critical point of the restricted loss and a saddle in full space
    W = np.full((3, 3), 1 / 3)
    assert np.linalg.norm(loss_and_grad(prob, W)[1]) < 1e-12
    assert not classify(prob, W)["is_second_order_min"]


def test_classify_at_origin_is_degenerate_not_negative():
    # every second derivative of the cubic loss vanishes at W = 0
    info = classify(identity_problem(poly(3), 3), np.zeros((3, 3)))
    assert info["min_eig"] == 0.0 and info["max_eig"] == 0.0
    assert info["is_second_order_min"]


def test_classify_rejects_non_critical_points():
    with pytest.raises(NotCriticalError):
        classify(identity_problem(poly(3), 3), np.full((3, 3), 0.2))


def test_refine_symmetric_snaps_to_symmetric_point():
    prob = identity_problem(poly(3), 4)
    W = np.eye(4) + 1e-8 * xavier_init(4, 4, 1)
    W = polish_newton(prob, W, tol=1e-13).W
    out, tol = refine_symmetric(prob, W)
    assert loss(prob, out) < 1e-15
    assert np.max(np.abs(out - W)) <= 5 * max(tol, 1e-6)


def test_record_json_round_trip():
    rec = CriticalPointRecord(W=np.eye(2), loss=0.5, grad_norm=1e-11, status="converged", seed=4, isotropy="1")
    back = CriticalPointRecord.from_json(rec.to_json())
    assert np.array_equal(back.W, rec.W) and back.loss == 0.5 and back.seed == 4 and back.isotropy == "1"


def test_survey_is_deterministic_and_sorted(monkeypatch):
    prob = identity_problem(poly(3), 5)
    cfg = GDConfig(eps_g=1e-9, seed=10)
    monkeypatch.setenv("SYMBREAK_THREADS", "3")
    a = survey(prob, 6, cfg)
    monkeypatch.setenv("SYMBREAK_THREADS", "1")
    b = survey(prob, 6, cfg)
    assert [r.to_json() for r in a] == [r.to_json() for r in b]
    keys = [(r.loss, r.seed) for r in a]
    assert keys == sorted(keys)
    assert sum(r.hits for r in a) == 6
    for r in a:
        assert r.seed in range(10, 16)
        if r.converged:
            assert loss(prob, r.W) == pytest.approx(r.loss, abs=1e-12)
            assert r.isotropy
