import subprocess
import sys

import numpy as np
import pytest

from bregman_stationarity.driver import RunConfig, RunMode, run
from bregman_stationarity.errors import ConstructionError, UnderflowError
from bregman_stationarity.hardness import (
    PolyStart,
    TrapConfig,
    TrapKind,
    certified_poly_start,
    entropy_trap_start,
    figure_frame,
    init_entropy_trap,
    init_poly_trap,
    rate_envelope,
    run_trap,
    search_trap_start,
    trap_run_config,
    trap_start,
)
from bregman_stationarity.problem import builtin


def test_entropy_trap_default():
    cfg = TrapConfig(eps=0.1, t=1.0, K=120)
    outcome = run_trap(cfg)
    assert outcome.trapped and outcome.ball_trapped and outcome.terminal_trapped
    assert len(outcome.trajectory) == 121
    assert outcome.max_distance <= 0.1

    # sharper per-step bound: the distance grows by at most e per step up to eps
    distances = np.linalg.norm(outcome.trajectory.iterates - [0.0, 1.0], axis=1)
    for k in range(cfg.K):
        assert distances[k + 1] <= np.exp(-(cfg.K - k - 1)) * cfg.eps + 1e-9


def test_poly_trap_default():
    cfg = TrapConfig(eps=0.1, t=1.0, K=120, alpha=1.0)
    assert cfg.kind is TrapKind.POLY
    outcome = run_trap(cfg)
    assert outcome.trapped
    assert outcome.trajectory.final.x[0] <= np.sqrt(2.0) * 0.1


def test_trap_starts():
    cfg = TrapConfig(eps=0.1, t=1.0, K=120, alpha=1.0)
    assert init_poly_trap(cfg)[0] == pytest.approx(np.sqrt(2.0 / 220.0))
    assert certified_poly_start(cfg)[0] == pytest.approx(0.5 / np.sqrt(220.0))
    assert trap_start(cfg)[0] == certified_poly_start(cfg)[0]
    np.testing.assert_array_equal(
        trap_start(TrapConfig(alpha=1.0, poly_start=PolyStart.PRINTED)), init_poly_trap(cfg)
    )
    np.testing.assert_array_equal(
        trap_start(TrapConfig(alpha=1.0, poly_start=PolyStart.ENTROPY)), entropy_trap_start(0.1, 1.0, 120)
    )
    # capped for large eps and short horizons
    assert init_poly_trap(TrapConfig(eps=0.9, K=1, alpha=1.0))[0] <= 0.8

    x0 = entropy_trap_start(0.5, 1.0, 10)
    assert x0[0] == pytest.approx(0.25 * np.sqrt(2.0) * np.exp(-10.0), rel=1e-15)
    assert x0.sum() == pytest.approx(1.0)


@pytest.mark.parametrize("alpha", [None, 1.0])
def test_single_step_is_trapped(alpha):
    assert run_trap(TrapConfig(eps=0.1, K=1, alpha=alpha)).trapped


def test_entropy_trap_large_eps():
    outcome = run_trap(TrapConfig(eps=0.5, t=1.0, K=10))
    assert outcome.trapped
    assert outcome.trajectory.iterates[0][0] == pytest.approx(0.25 * np.sqrt(2.0) * np.exp(-10.0))


def test_log_domain_trap_beyond_underflow():
    cfg = TrapConfig(eps=0.1, t=1.0, K=1000, mode=RunMode.LOG_DOMAIN)
    with pytest.raises(UnderflowError):
        entropy_trap_start(cfg.eps, cfg.t, cfg.K)
    log_x0 = init_entropy_trap(cfg)
    assert log_x0[0] == pytest.approx(np.log(np.sqrt(2.0) * 0.05) - 1000.0)

    outcome = run_trap(cfg)
    assert outcome.trapped
    assert outcome.trajectory.final.x[0] > 1e-3


def test_trap_config_validation():
    with pytest.raises(ConstructionError):
        TrapConfig(eps=1.5)
    with pytest.raises(ConstructionError):
        TrapConfig(t=0.0)
    with pytest.raises(ConstructionError):
        TrapConfig(K=0)
    with pytest.raises(ConstructionError):
        TrapConfig(alpha=-1.0)
    with pytest.raises(ConstructionError):
        TrapConfig(alpha=1.0, mode=RunMode.LOG_DOMAIN)


def test_trap_needs_spurious_point():
    with pytest.raises(ConstructionError):
        run_trap(TrapConfig(spurious_point=(1.0, 0.0)))


def test_search_trap_start():
    lp = builtin("lp_simplex")
    x0 = search_trap_start(lp, [0.0, 1.0], eps=0.1, t=1.0, K=5)
    assert x0 is not None
    trajectory = run(lp, x0, RunConfig(t=1.0, max_iters=5, stop_r_ext=None))
    assert np.all(np.linalg.norm(trajectory.iterates - [0.0, 1.0], axis=1) <= 0.1)


def test_rate_envelope():
    lp = builtin("lp_simplex")
    assert rate_envelope(lp, [0.5, 0.5], [1.0, 0.0], 1.0, 1) == pytest.approx(np.log(2.0))
    assert rate_envelope(lp, [0.5, 0.5], [1.0, 0.0], 0.5, 4) == pytest.approx(np.log(2.0) / 2.0)
    with pytest.raises(ConstructionError):
        rate_envelope(lp, [0.5, 0.5], [1.0, 0.0], 1.0, 0)


def test_figure_frame():
    entropy = run_trap(TrapConfig(K=5)).trajectory
    poly = run_trap(TrapConfig(K=3, alpha=1.0)).trajectory
    frame = figure_frame(entropy, poly)
    assert list(frame.columns) == ["k", "x1_entropy", "x1_poly"]
    assert frame["k"].tolist() == [0, 1, 2, 3, 4, 5]
    assert frame["x1_poly"].isna().sum() == 2

    empty = figure_frame(None, None)
    assert list(empty.columns) == ["k", "x1_entropy", "x1_poly"]
    assert empty.empty


def test_run_trap_outside_the_cli():
    """The verdict log level exists without the CLI having been imported"""
    script = (
        "import sys\n"
        "from bregman_stationarity.hardness import TrapConfig, run_trap\n"
        "outcome = run_trap(TrapConfig(K=5))\n"
        "assert 'bregman_stationarity.main' not in sys.modules\n"
        "print(outcome.trapped)\n"
    )
    result = subprocess.run([sys.executable, "-c", script], capture_output=True, text=True)
    assert result.returncode == 0, result.stderr
    assert result.stdout.strip() == "True"


def test_entropy_trap_escapes_after_the_horizon():
    cfg = TrapConfig(eps=0.1, t=1.0, K=120)
    trajectory = run(builtin("entropy_trap"), trap_start(cfg), trap_run_config(cfg, extra_steps=10 * cfg.K))
    x1 = trajectory.iterates[:, 0]
    assert len(x1) == 11 * cfg.K + 1
    rising = x1 < 0.99
    assert np.all(np.diff(x1)[rising[:-1]] > 0.0)
    assert np.all(x1[np.argmin(rising):] >= 0.99)
    assert np.argmax(x1 > cfg.eps) > cfg.K
    assert x1[-1] > 1.0 - 1e-12


def test_printed_poly_start_escapes():
    """Only the certified start keeps x1 below eps for the whole horizon"""
    printed = run_trap(TrapConfig(alpha=1.0, poly_start=PolyStart.PRINTED))
    assert not printed.trapped
    assert not printed.terminal_trapped
    assert printed.trajectory.final.x[0] > 0.5

    certified = run_trap(TrapConfig(alpha=1.0, poly_start=PolyStart.CERTIFIED))
    assert certified.trapped
    assert certified.trajectory.final.x[0] <= 0.1
