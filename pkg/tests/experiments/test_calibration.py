import math

import numpy as np
import pytest

from fxy.effective import ChainConfig, EffectiveCoupling, chain_loop_fluxes
from fxy.errors import CalibrationFitError
from fxy.experiments.calibration import (
    LoopPhaseProbe,
    adjusted_bond,
    calibrate_loop_phases,
    fit_cosine,
    probe_time,
    verify_calibration,
)


def test_fit_cosine_recovers_parameters():
    phases = 2 * math.pi * np.arange(24) / 24
    values = 0.4 + 0.3 * np.cos(phases - 2.5)
    fit = fit_cosine(phases, values)
    assert fit.offset == pytest.approx(0.4)
    assert fit.amplitude == pytest.approx(0.3)
    assert fit.phase == pytest.approx(2.5)
    assert fit.r2 == pytest.approx(1.0)

    fit = fit_cosine(phases, 0.4 - 0.3 * np.cos(phases))
    assert fit.amplitude == pytest.approx(0.3)
    assert abs(fit.phase) == pytest.approx(math.pi)


def test_adjusted_bonds_and_probe_time():
    assert [adjusted_bond(t) for t in range(4)] == [0, 2, 3, 4]
    assert probe_time(0.75) == pytest.approx(1e3 / 3)


def test_zero_offsets_need_no_correction():
    probe = LoopPhaseProbe([0.0] * 5, [0.0] * 5)
    result = verify_calibration(probe, calibrate_loop_phases(probe, ChainConfig.uniform(6, 0.75)))
    assert len(result.triples) == 4
    assert max(abs(c) for c in result.corrections()) <= 0.01
    assert probe.n_measurements == 4 * 24


@pytest.mark.parametrize("seed", range(20))
def test_random_offsets_are_calibrated_away(seed):
    probe = LoopPhaseProbe.random(5, seed=seed)
    settings = ChainConfig.uniform(6, 0.75)
    assert max(abs(x) for x in chain_loop_fluxes(probe.true_chain(settings))) > 0.01

    result = verify_calibration(probe, calibrate_loop_phases(probe, settings))
    assert len(result.residual_flux) == 4
    assert max(abs(x) for x in result.residual_flux) <= 0.01
    assert min(result.xx_fraction) >= 0.99

    df = result.to_dataframe()
    assert list(df.columns) == ["triple", "bond", "phase", "correction_rad", "residual_flux_rad", "xx_fraction"]
    assert df["residual_flux_rad"].abs().max() <= 0.01


def test_calibration_is_idempotent():
    probe = LoopPhaseProbe.random(5, seed=11)
    first = calibrate_loop_phases(probe, ChainConfig.uniform(6, 0.75))
    second = calibrate_loop_phases(probe, first.settings)
    assert max(abs(c) for c in second.corrections()) <= 1e-3


def test_calibration_failures():
    no_hopping = ChainConfig(3, tuple(EffectiveCoupling(i, g_blue=0.75) for i in range(2)))
    with pytest.raises(CalibrationFitError) as exc:
        calibrate_loop_phases(LoopPhaseProbe([0.0, 0.0], [0.0, 0.0]), no_hopping, t=300.0)
    assert exc.value.triple == 0

    with pytest.raises(ValueError):
        calibrate_loop_phases(LoopPhaseProbe([0.0], [0.0]), ChainConfig.uniform(2, 0.75))
    with pytest.raises(ValueError):
        LoopPhaseProbe([0.0, 1.0], [0.0])
    with pytest.raises(ValueError):
        LoopPhaseProbe([0.0], [0.0]).true_chain(ChainConfig.uniform(3, 0.75))
