import csv

import numpy as np
import pytest

from crossdiff import models as M
from crossdiff.entropy import boltzmann_entropy, cubic_entropy, potential_entropy, select_entropy
from crossdiff.errors import ContractViolation, Stalled
from crossdiff.simulate import (
    SimConfig,
    discrete_dissipation,
    face_flux,
    run,
    step,
    write_csv,
)

SKT = M.make_model("SktLinear", 2, {"a0": [1, 1], "a": [[1, 2], [1, 1]]})
CUBIC = M.make_model("CubicExample")
FLUID = M.make_model("FluidLinear", 2, {"a": [[2, 1], [1, 2]]})


def test_constant_state_is_fixed_point():
    u = np.tile([1.0, 0.5], (32, 1))
    assert np.array_equal(step(SKT, u, 1e-4, 1 / 32), u)
    res = run(SimConfig(SKT, boltzmann_entropy([1, 2]), cells=16, amplitude=[0, 0], base=[1, 0.5], t_final=1e-3))
    assert np.all(res.entropy == res.entropy[0])
    assert np.all(res.dissipation == 0)


def test_step_conserves_mass(rng):
    dx = 1 / 40
    for _ in range(20):
        u = rng.uniform(0.5, 2.0, (40, 2))
        new = step(SKT, u, 1e-5, dx)
        assert np.allclose(new.sum(axis=0), u.sum(axis=0), rtol=0, atol=1e-12)


def test_no_flux_at_the_ends():
    u = np.linspace(1, 2, 10)[:, None] * np.ones((1, 2))
    F, *_ = face_flux(SKT, u, 0.1)
    assert F.shape == (9, 2)


def test_porous_medium_bump_decays_in_max_norm():
    m = M.make_model("SktLinear", 1, {"a0": [0], "a": [[1]]})
    u0 = np.full((16, 1), 0.5)
    u0[7:9] = 1.5
    res = run(SimConfig(m, boltzmann_entropy([1.0]), cells=16, initial=u0, t_final=0.05))
    peaks = res.umax[:, 0]
    assert np.all(np.diff(peaks) <= 1e-15)
    assert peaks[-1] < peaks[0]
    assert np.all(np.diff(res.umin[:, 0]) >= -1e-15)


def test_skt_run_is_monotone_and_conservative():
    res = run(SimConfig(SKT, boltzmann_entropy([1, 2]), cells=64))
    assert res.reason == "completed"
    assert len(res.monotonicity_violations()) == 0
    assert np.max(np.abs(res.mass - res.mass[0])) < 1e-10
    assert res.accepted > 10


def test_refinement_shrinks_balance_residual():
    h = boltzmann_entropy([1, 2])
    r64 = run(SimConfig(SKT, h, cells=64, t_final=0.005)).max_residual
    r128 = run(SimConfig(SKT, h, cells=128, t_final=0.005)).max_residual
    assert r64 / r128 >= 1.5


def _cubic_parts(u, dx):
    _, g, ubar, _ = face_flux(CUBIC, u, dx)
    a = ubar * g
    # (u_i^2)_x on a face is exactly 2 ubar_i g_i
    return a, dx * np.sum((2.0 * a) ** 2)


def test_cubic_dissipation_identities():
    dx = 1 / 128
    x = (np.arange(128) + 0.5) * dx
    h = cubic_entropy()
    same = 1.0 + 0.4 * np.cos(np.pi * x)[:, None] * np.ones((1, 3))
    mixed = np.stack([1 + 0.4 * np.cos(np.pi * x), 1 - 0.3 * np.cos(2 * np.pi * x), 1 + 0.2 * np.sin(np.pi * x)], 1)
    for u in (same, mixed):
        a, squares = _cubic_parts(u, dx)
        D = discrete_dissipation(CUBIC, h, u, dx)
        # u^T diag(u) A2 diag(u) u' with A2 = I + cyclic shift
        assert D == pytest.approx(dx * np.sum(0.5 * (a ** 2).sum(1) + 0.5 * a.sum(1) ** 2), rel=1e-12)
        if u is same:
            assert D == pytest.approx(0.5 * squares, rel=0.05)
        else:
            assert abs(D - 0.5 * squares) > 0.05 * D


def test_cubic_run_tracks_half_gradient_square_for_identical_profiles():
    res = run(SimConfig(CUBIC, cubic_entropy(), cells=128, base=[1, 1, 1], amplitude=[0.4, 0.4, 0.4],
                        t_final=2e-3, stride=10))
    assert len(res.monotonicity_violations()) == 0
    for u in res.states:
        D = discrete_dissipation(CUBIC, cubic_entropy(), u, 1 / 128)
        assert D == pytest.approx(0.5 * _cubic_parts(u, 1 / 128)[1], rel=0.05)


def test_fluid_second_entropy_dissipation():
    h = potential_entropy(FLUID, [1, 1])
    res = run(SimConfig(FLUID, h, cells=64, t_final=2e-3, stride=5))
    assert len(res.monotonicity_violations()) == 0
    dx = 1 / 64
    for u in res.states:
        _, g, ubar, _ = face_flux(FLUID, u, dx)
        dp = g @ np.asarray(FLUID.params["a"]).T
        expected = dx * np.sum(ubar * dp ** 2)
        assert discrete_dissipation(FLUID, h, u, dx) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("model", [
    SKT,
    CUBIC,
    FLUID,
    M.make_model("VolumeFillingChi", 2, {"C": [[1, 0.5], [0.5, 2]], "gamma": 1.5}),
    M.make_model("KellerSegel", params={"delta": 1.0}),
], ids=lambda m: m.family)
@pytest.mark.parametrize("cells", [32, 64])
def test_entropy_monotone_for_verified_pairs(model, cells):
    sel = select_entropy(model, M.sample_domain(model, 50))
    assert sel.found
    res = run(SimConfig(model, sel.entropy, cells=cells, t_final=2e-3))
    assert len(res.monotonicity_violations()) == 0
    assert np.max(np.abs(res.mass - res.mass[0])) < 1e-10


def test_wrong_entropy_breaks_monotonicity():
    m = M.make_model("SktLinear", 2, {"a0": [0.05, 0.05], "a": [[0.05, 10], [0.1, 0.05]]})
    res = run(SimConfig(m, boltzmann_entropy([1, 1]), cells=64, base=[1, 1], amplitude=[0.5, -0.5]))
    assert len(res.monotonicity_violations()) > 0


def test_stalled_run_keeps_partial_result():
    m = M.make_model("KellerSegel", params={"delta": 2.0})
    sel = select_entropy(m, M.sample_domain(m, 20))
    with pytest.raises(Stalled) as err:
        run(SimConfig(m, sel.entropy, base=[1, 0.1], amplitude=[0.9, 0]))
    partial = err.value.result
    assert partial.reason == "stalled" and partial.accepted > 0


def test_config_contracts():
    h = boltzmann_entropy([1, 2])
    with pytest.raises(ContractViolation):
        run(SimConfig(SKT, h, cells=4))
    with pytest.raises(ContractViolation):
        run(SimConfig(SKT, h, safety=1.5))
    with pytest.raises(ContractViolation):
        run(SimConfig(SKT, h, base=[0.02, 1], amplitude=[0, 0]))


def test_csv_layout(tmp_path):
    res = run(SimConfig(SKT, boltzmann_entropy([1, 2]), cells=16, t_final=1e-3))
    path = tmp_path / "out.csv"
    write_csv(res, path, stride=3)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["t", "H", "D", "residual", "mass_1", "mass_2", "min_1", "min_2", "max_1", "max_2"]
    assert rows[-1][3] == "" and float(rows[-1][0]) == pytest.approx(1e-3)
    assert float(rows[1][1]) == res.entropy[0]
