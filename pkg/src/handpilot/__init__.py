"""Ground-station and training toolkit for handheld-controller drone piloting.

The pipeline mirrors a real setup: controller state -> channel mapping ->
CRSF/ELRS-style radio link -> angle-mode quadrotor -> training-course scoring,
with session recording/replay and a live network service for a browser UI.
"""

__version__ = "0.1.0"

from .crsf import (
    ChannelSet,
    CrsfFrame,
    FrameParser,
    LinkStatistics,
    channel_ticks_to_microseconds,
    crc8_dvb_s2,
    decode_frame,
    encode_rc_frame,
    microseconds_to_ticks,
    pack_channels,
    unpack_channels,
)
from .mapping import (
    ArmingState,
    ArmMode,
    ControllerState,
    MappingConfig,
    calibrate_neutral,
    map_state,
    shape_axis,
    slew_limit,
    step_arming,
)
from .link import LinkConfig, LinkStatsWindow, RadioLink, check_failsafe, schedule_packets
from .dynamics import (
    AngleController,
    QuadParams,
    QuadState,
    SimulationFault,
    setpoints_from_channels,
    step,
    trim_hover,
)
from .course import (
    Course,
    ExerciseScript,
    Gate,
    Obstacle,
    ScriptRunner,
    check_collision,
    check_gate_pass,
    default_course,
    load_course,
    save_course,
)
from .session import (
    ReplayInput,
    SessionConfig,
    SessionRecord,
    replay_session,
    run_session,
    session_config_from_file,
)
from .ueq import UeqResponse, UeqScales, load_responses_csv, score
