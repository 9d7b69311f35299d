import numpy as np
import pytest

from critwave.grid import make_grid
from critwave.problem import InitialDataSpec, ProblemSpec
from critwave.rundriver import (
    RunConfig,
    Trajectory,
    TrajectoryWriter,
    decay_weights,
    gn_check,
    matsumura_fit,
    run,
)


def _prob(model="damped_wave", p=3.0, q=3.0, n=1, eps=1.0, **data_kw):
    return ProblemSpec(model=model, n=n, p=p, q=q, eps=eps,
                       data=InitialDataSpec(**data_kw))


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(t_max=-1.0)
    with pytest.raises(ValueError):
        RunConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        RunConfig(boundary_band=0.7)
    with pytest.raises(ValueError):
        RunConfig(snapshot_every=0)


def test_decay_weight_identity():
    # alpha*q = 1 - gamma on the curve, and both vanish when p = q
    for p, q in [(2.0, 5.0), (7 / 3, 9.0), (2.5, 3.0)]:
        gamma, alpha = decay_weights(p, q, 1)
        assert gamma > 0 and alpha > 0
        # identity alpha*q = 1 - gamma holds for critical pairs only; here
        # check the defining formulas instead
        assert gamma == pytest.approx((q - p) / (p * q - 1.0))
    assert decay_weights(3.0, 3.0, 1) == (0.0, 0.0)


def test_zero_data_survives_with_zero_norms():
    prob = _prob(shape="gaussian", a_u0=0.0, a_v0=0.0)
    g = make_grid(1, 10.0, 32)
    res = run(prob, g, RunConfig(t_max=2.0, dt0=0.5))
    assert res.status == "survived"
    h = res.history.as_arrays()
    assert np.all(h["sup_u"] == 0.0)
    assert np.all(h["sup_v"] == 0.0)
    assert np.all(h["m_u"] == 0.0)


def test_constant_data_blows_up_and_is_monotone_in_eps():
    g = make_grid(1, 10.0, 32)
    cfg = RunConfig(t_max=50.0, dt0=0.02, rel_tol=1e-6, boundary_guard=False)
    times = []
    for eps in (1.2, 1.0):
        res = run(_prob(shape="constant", eps=eps), g, cfg)
        assert res.status == "blew_up"
        assert np.isfinite(res.T_num) and res.T_num <= 50.0
        times.append(res.T_num)
    assert times[0] < times[1]  # larger data blows up sooner


def test_boundary_guard_trips():
    # data parked in the boundary band invalidates the run immediately
    prob = _prob(shape="gaussian", width=3.0)
    g = make_grid(1, 4.0, 32)
    res = run(prob, g, RunConfig(t_max=5.0, dt0=0.1))
    assert res.status == "inconclusive_boundary"
    assert res.boundary_mass_max > 1e-6


def test_supercritical_survives():
    prob = _prob(p=4.0, q=4.0, shape="gaussian", eps=0.05)
    g = make_grid(1, 30.0, 128)
    res = run(prob, g, RunConfig(t_max=20.0, dt0=0.1))
    assert res.status == "survived"
    h = res.history.as_arrays()
    assert h["t"][-1] == pytest.approx(20.0, abs=1e-9)
    assert np.all(np.isfinite(h["m_u"]))


def test_trajectory_roundtrip_bit_exact(tmp_path):
    prob = _prob(shape="gaussian", p=4.0, q=4.0, eps=0.1)
    g = make_grid(1, 20.0, 64)
    path = str(tmp_path / "run.bin")
    run(prob, g, RunConfig(t_max=1.0, dt0=0.1, snapshot_every=2),
        trajectory_path=path)
    traj = Trajectory.load(path)
    assert traj.times[0] == 0.0
    assert traj.t_covered == pytest.approx(1.0, abs=1e-12)
    # rewrite the loaded frames: the bytes must reproduce exactly
    path2 = str(tmp_path / "copy.bin")
    w = TrajectoryWriter(path2, traj.header)
    for i in range(len(traj.times)):
        w.write_frame(traj.times[i], [traj.fields[k][i] for k in traj.header["fields"]])
    w.close()
    assert open(path, "rb").read() == open(path2, "rb").read()


def test_truncated_trajectory_rejected(tmp_path):
    prob = _prob(shape="gaussian", p=4.0, q=4.0, eps=0.1)
    g = make_grid(1, 20.0, 64)
    path = str(tmp_path / "run.bin")
    run(prob, g, RunConfig(t_max=0.5, dt0=0.1), trajectory_path=path)
    raw = open(path, "rb").read()
    open(path, "wb").write(raw[:-7])
    with pytest.raises(ValueError, match="truncated"):
        Trajectory.load(path)


def test_heat_model_runs():
    prob = _prob(model="reaction_diffusion", shape="gaussian", p=4.0, q=4.0, eps=0.1)
    g = make_grid(1, 20.0, 64)
    res = run(prob, g, RunConfig(t_max=5.0, dt0=0.1))
    assert res.status == "survived"


def test_matsumura_window_validation():
    prob = _prob(shape="gaussian", eps=1.0)
    g = make_grid(1, 30.0, 128)
    res = run(prob, g, RunConfig(t_max=5.0, dt0=0.5), linear=True)
    with pytest.raises(ValueError):
        matsumura_fit(res.history, window=(50.0, 500.0))


def test_matsumura_short_window_fit():
    # over a short horizon the fit runs but the slope is transient-dominated;
    # only check it returns finite numbers on a valid window
    prob = _prob(shape="gaussian", eps=1.0)
    g = make_grid(1, 60.0, 256)
    res = run(prob, g, RunConfig(t_max=30.0, dt0=0.25), linear=True)
    s2, sg = matsumura_fit(res.history, window=(5.0, 30.0))
    assert np.isfinite(s2) and np.isfinite(sg)
    assert s2 < 0 and sg < 0


def test_gn_check_identity_and_gaussian():
    g = make_grid(1, 30.0, 512)
    f = np.exp(-(g.x / 2.0) ** 2)
    assert gn_check(f, g, 2) == pytest.approx(1.0, rel=1e-12)
    # 1-d sharp constant is below 1; the Gaussian comes close
    assert gn_check(f, g, np.inf) <= 1.1
    with pytest.raises(ValueError):
        gn_check(np.zeros(g.shape), g, 4)
    with pytest.raises(ValueError):
        gn_check(f, g, 1.5)


def test_gn_scale_invariance():
    g = make_grid(1, 30.0, 2048)
    f1 = np.exp(-(g.x / 2.0) ** 2)
    f2 = np.exp(-(g.x / 1.0) ** 2)
    r = 6
    assert gn_check(f1, g, r) == pytest.approx(gn_check(f2, g, r), rel=1e-6)
