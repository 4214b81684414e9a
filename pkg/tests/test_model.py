import numpy as np
import pytest

from wavedelay.model import (
    DelaySchedule,
    InitialState,
    ScheduleError,
    StringConfig,
    preset_state,
    random_state,
)


@pytest.mark.parametrize("kw", [{"L": 0}, {"c": -1}, {"iota": -1}, {"iota": 1.5}, {"iota": True}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        StringConfig(**kw)


def test_config_derived():
    cfg = StringConfig(2.0, 4.0, -0.1, 3)
    assert cfg.period == 1.0 and cfg.onset == 6.0


def test_schedule_ordering():
    with pytest.raises(ScheduleError):
        DelaySchedule("constant", ((1.0, 4.0),))
    with pytest.raises(ScheduleError):
        DelaySchedule("lattice", ((0.0, 4.0), (2.0, 4.0), (2.0, 8.0)))
    with pytest.raises(ScheduleError):
        DelaySchedule("bogus", ((0.0, 4.0),))


def test_switching_requires_iota_two():
    with pytest.raises(ScheduleError):
        DelaySchedule.switching(StringConfig(iota=1), [(0.0, 4.0)])
    with pytest.raises(ScheduleError):
        DelaySchedule.switching(StringConfig(iota=2), [(0.0, 6.0)])


def test_random_switching_alternates_on_lattice():
    cfg = StringConfig(1.0, 2.0, -0.003, 2)
    s = DelaySchedule.random_switching(cfg, 50.0, 2.0, seed=3)
    vals = [d for _, d in s.segments]
    assert all(a != b for a, b in zip(vals, vals[1:]))
    assert set(vals) <= {2.0, 4.0}
    starts = np.array([t for t, _ in s.segments]) / cfg.period
    assert np.allclose(starts, np.round(starts))
    assert s == DelaySchedule.random_switching(cfg, 50.0, 2.0, seed=3)


def test_delay_lookup():
    s = DelaySchedule("lattice", ((0.0, 2.0), (3.0, 5.0)))
    assert s.delay_at(2.999) == 2.0 and s.delay_at(3.0) == 5.0
    assert s.max_delay == 5.0


def test_lattice_cells():
    s = DelaySchedule("lattice", ((0.0, 2.0), (3.0, 5.0)))
    starts, delays = s.lattice_cells(0.5, 1.0)
    assert starts.tolist() == [0, 6] and delays.tolist() == [4, 10]
    with pytest.raises(ScheduleError, match="lattice"):
        s.lattice_cells(0.4, 1.0)


def test_presets_pin_left_end():
    for name in ("sine", "pluck", "random"):
        init = preset_state(name, 1.5, 2.0)
        init.check(1.5)
        assert init.y0(np.array([0.0]))[0] == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        preset_state("nope", 1.0)


def test_random_state_reproducible():
    a, b = random_state(1.0, seed=9), random_state(1.0, seed=9)
    x = np.linspace(0, 1, 7)
    assert np.array_equal(a.y0(x), b.y0(x)) and np.array_equal(a.y1(x), b.y1(x))


def test_from_samples():
    x = np.linspace(0, 1, 11)
    init = InitialState.from_samples(x, x**2, np.ones(11))
    assert init.y0(0.55) == pytest.approx(0.5 * (0.25 + 0.36))
