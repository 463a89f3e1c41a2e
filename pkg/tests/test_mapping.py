import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from handpilot.crsf import TICK_MAX, TICK_MIN
from handpilot.mapping import (
    ArmingState,
    ArmMode,
    ControllerState,
    InsufficientDataError,
    MappingConfig,
    calibrate_neutral,
    map_state,
    shape_axis,
    slew_limit,
    step_arming,
)


def shaped_reference(x, dz, expo):
    """Direct evaluation of the two shaping formulas."""
    y = math.copysign(max(0.0, (abs(x) - dz) / (1.0 - dz)), x)
    return (1.0 - expo) * y + expo * y ** 3


class TestCalibrate:
    def test_all_zero(self):
        samples = [ControllerState() for _ in range(10)]
        assert calibrate_neutral(samples) == (0.0, 0.0)

    def test_constant_offset(self):
        samples = [ControllerState(tilt_pitch=2.0, tilt_roll=-1.0) for _ in range(12)]
        assert calibrate_neutral(samples) == (2.0, -1.0)

    def test_mixed_samples_mean(self):
        pitches = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0]
        rolls = [-1.0, 0.0, 1.0, 2.0, -2.0, 0.5, -0.5, 1.5, -1.5, 0.0]
        samples = [ControllerState(tilt_pitch=p, tilt_roll=r) for p, r in zip(pitches, rolls)]
        off_p, off_r = calibrate_neutral(samples)
        assert off_p == pytest.approx(sum(pitches) / 10)
        assert off_r == pytest.approx(sum(rolls) / 10)

    def test_too_few_samples(self):
        with pytest.raises(InsufficientDataError):
            calibrate_neutral([ControllerState()] * 9)


class TestShapeAxis:
    def test_zero(self):
        assert shape_axis(0.0, 0.05, 0.3) == 0.0

    @pytest.mark.parametrize("dz,expo", [(0.0, 0.0), (0.05, 0.3), (0.2, 0.7)])
    def test_endpoints(self, dz, expo):
        assert shape_axis(1.0, dz, expo) == pytest.approx(1.0)
        assert shape_axis(-1.0, dz, expo) == pytest.approx(-1.0)

    def test_half_input_matches_formula(self):
        assert shape_axis(0.5, 0.05, 0.3) == pytest.approx(shaped_reference(0.5, 0.05, 0.3))

    @given(st.floats(-1, 1), st.floats(0, 0.49), st.floats(0, 0.99))
    def test_odd_function(self, x, dz, expo):
        assert shape_axis(-x, dz, expo) == pytest.approx(-shape_axis(x, dz, expo))

    def test_inside_deadzone(self):
        assert shape_axis(0.04, 0.05, 0.3) == 0.0
        assert shape_axis(-0.04, 0.05, 0.3) == 0.0


class TestMapState:
    def test_neutral(self):
        cs = map_state(ControllerState(), MappingConfig())
        assert cs.channels == (992, 992, 172, 992, 172) + (992,) * 11

    def test_full_deflection(self):
        cfg = MappingConfig()
        state = ControllerState(trigger=1.0, tilt_pitch=cfg.max_tilt_deg)
        cs = map_state(state, cfg)
        assert cs[2] == 1811  # throttle
        assert cs[1] == 1811  # pitch

    def test_negative_full_deflection(self):
        cfg = MappingConfig()
        cs = map_state(ControllerState(tilt_roll=-cfg.max_tilt_deg), cfg)
        assert cs[0] == 172

    def test_half_deflection_matches_oracle(self):
        cfg = MappingConfig()
        cs = map_state(ControllerState(tilt_pitch=cfg.max_tilt_deg / 2), cfg)
        z = shaped_reference(0.5, cfg.deadzone, cfg.expo)
        expected = 992 + math.floor(z * 819.5 + 0.5)
        assert cs[1] == expected

    def test_armed_channel_five(self):
        assert map_state(ControllerState(), MappingConfig(), armed=True)[4] == 1811

    def test_overtilt_saturates(self):
        cs = map_state(ControllerState(tilt_pitch=500.0), MappingConfig())
        assert cs[1] == 1811

    def test_offsets_subtracted(self):
        cfg = MappingConfig()
        cs = map_state(ControllerState(tilt_pitch=3.0, tilt_roll=-2.0), cfg, offsets=(3.0, -2.0))
        assert cs[0] == 992 and cs[1] == 992

    def test_invert_flag(self):
        cfg = MappingConfig(invert_pitch=True)
        cs = map_state(ControllerState(tilt_pitch=cfg.max_tilt_deg), cfg)
        assert cs[1] == 172

    def test_taer_order(self):
        cfg = MappingConfig(channel_order="TAER")
        cs = map_state(ControllerState(trigger=1.0), cfg)
        assert cs[0] == 1811

    def test_monotone_in_tilt(self):
        cfg = MappingConfig()
        prev = None
        for i in range(1001):
            tilt = -40.0 + 80.0 * i / 1000
            tick = map_state(ControllerState(tilt_pitch=tilt), cfg)[1]
            if prev is not None:
                assert tick >= prev
            prev = tick

    def test_symmetry_around_center(self):
        cfg = MappingConfig()
        for i in range(101):
            tilt = 30.0 * i / 100
            up = map_state(ControllerState(tilt_pitch=tilt), cfg)[1]
            down = map_state(ControllerState(tilt_pitch=-tilt), cfg)[1]
            assert abs((up - 992) - (992 - down)) <= 1

    @given(st.floats(allow_nan=False, allow_infinity=False, min_value=-1e6, max_value=1e6),
           st.floats(allow_nan=False, allow_infinity=False, min_value=-1e6, max_value=1e6),
           st.floats(0, 1), st.floats(-1, 1))
    def test_output_range(self, tilt_p, tilt_r, trigger, stick):
        state = ControllerState(trigger=trigger, tilt_pitch=tilt_p, tilt_roll=tilt_r,
                                thumbstick_x=stick)
        cs = map_state(state, MappingConfig(), armed=True)
        assert all(TICK_MIN <= v <= TICK_MAX for v in cs.channels)


class TestArming:
    def test_arm_with_trigger_low(self):
        s = step_arming(ArmingState(), ControllerState(arm_button=True), link_ok=True)
        assert s.mode is ArmMode.ARMED

    def test_arm_blocked_with_trigger_raised(self):
        s = step_arming(ArmingState(), ControllerState(trigger=0.5, arm_button=True), link_ok=True)
        assert s.mode is ArmMode.DISARMED

    def test_disarm_from_armed(self):
        armed = ArmingState(mode=ArmMode.ARMED)
        s = step_arming(armed, ControllerState(trigger=0.8, arm_button=True), link_ok=True)
        assert s.mode is ArmMode.DISARMED

    def test_link_loss_forces_failsafe(self):
        armed = ArmingState(mode=ArmMode.ARMED)
        s = step_arming(armed, ControllerState(trigger=0.8), link_ok=False)
        assert s.mode is ArmMode.FAILSAFE

    def test_failsafe_clears_only_with_trigger_low(self):
        fs = ArmingState(mode=ArmMode.FAILSAFE)
        still = step_arming(fs, ControllerState(trigger=0.5), link_ok=True)
        assert still.mode is ArmMode.FAILSAFE
        cleared = step_arming(fs, ControllerState(trigger=0.0), link_ok=True)
        assert cleared.mode is ArmMode.DISARMED

    def test_held_button_does_not_retoggle(self):
        s = step_arming(ArmingState(), ControllerState(arm_button=True), link_ok=True)
        assert s.mode is ArmMode.ARMED
        s = step_arming(s, ControllerState(arm_button=True), link_ok=True)
        assert s.mode is ArmMode.ARMED  # still held, no new edge

    def test_never_armed_with_trigger_raised(self):
        # sweep trigger values; an arm edge must only succeed below 0.05
        for i in range(1001):
            trigger = i / 1000
            s = step_arming(ArmingState(), ControllerState(trigger=trigger, arm_button=True),
                            link_ok=True)
            if s.mode is ArmMode.ARMED:
                assert trigger < 0.05


class TestSlewLimit:
    def test_fixed_point(self):
        cs = map_state(ControllerState(), MappingConfig())
        assert slew_limit(cs, cs, 0.004, 8000.0) == cs

    def test_limit_arithmetic(self):
        prev = map_state(ControllerState(), MappingConfig())
        from handpilot.crsf import ChannelSet
        target = ChannelSet.from_list([1811] * 16)
        out = slew_limit(prev, target, 0.004, 8000.0)
        assert out[0] == 992 + 32

    def test_huge_limit_passes_through(self):
        from handpilot.crsf import ChannelSet
        prev = ChannelSet.from_list([172] * 16)
        target = ChannelSet.from_list([1811] * 16)
        assert slew_limit(prev, target, 0.004, 1e9) == target

    def test_nonpositive_dt_rejected(self):
        cs = map_state(ControllerState(), MappingConfig())
        with pytest.raises(ValueError):
            slew_limit(cs, cs, 0.0, 8000.0)
