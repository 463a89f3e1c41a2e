import time

import pytest

from helpers_net import NetClient
from helpers_pilot import WaypointPilot

from handpilot.server import SessionServer
from handpilot.session import SessionConfig


@pytest.fixture()
def server():
    cfg = SessionConfig.defaults(max_duration_s=60.0)
    srv = SessionServer(cfg, realtime=True, speed=5.0)
    host, port = srv.start()
    yield srv, host, port
    srv.stop()


def test_hello_welcome_and_roles(server):
    _, host, port = server
    pilot = NetClient(host, port)
    welcome = pilot.hello()
    assert welcome["type"] == "welcome"
    assert welcome["role"] == "pilot"
    assert welcome["version"] == 1
    assert "track" in welcome["scripts"]

    observer = NetClient(host, port)
    assert observer.hello()["role"] == "observer"
    pilot.close()
    observer.close()


def test_version_mismatch_rejected(server):
    _, host, port = server
    client = NetClient(host, port)
    reply = client.hello(version=99)
    assert reply["type"] == "error"
    assert reply["error"] == "unsupported_version"
    client.close()


def test_malformed_message_keeps_connection(server):
    _, host, port = server
    client = NetClient(host, port)
    client.hello()
    client.sock.sendall(b"this is not json\n")
    reply = client.recv()
    assert reply["type"] == "error" and reply["error"] == "malformed"
    client.send({"type": "list_courses"})
    reply = client.recv_until(lambda m: m["type"] == "courses")
    assert reply["courses"] == ["paper-track"]
    client.close()


def test_get_course_returns_geometry(server):
    _, host, port = server
    client = NetClient(host, port)
    client.hello()
    client.send({"type": "get_course"})
    reply = client.recv_until(lambda m: m["type"] == "course")
    course = reply["course"]
    assert course["format"] == 1
    assert course["name"] == "paper-track"
    assert len(course["gates"]) == 1 and len(course["obstacles"]) == 2
    assert "track" in course["scripts"]
    client.close()


def test_control_before_start_warns(server):
    _, host, port = server
    client = NetClient(host, port)
    client.hello()
    client.send({"type": "control_input", "trigger": 0.0})
    reply = client.recv()
    assert reply["type"] == "event" and reply["event"] == "warning"
    client.close()


def test_observer_cannot_start(server):
    _, host, port = server
    pilot = NetClient(host, port)
    pilot.hello()
    observer = NetClient(host, port)
    observer.hello()
    observer.send({"type": "start"})
    reply = observer.recv()
    assert reply["type"] == "error" and reply["error"] == "observer_only"
    pilot.close()
    observer.close()


def test_stop_command_ends_session(server):
    srv, host, port = server
    client = NetClient(host, port)
    client.hello()
    client.send({"type": "start"})
    client.recv_until(lambda m: m.get("event") == "session_started")
    client.send({"type": "control_input", "trigger": 0.0})
    client.send({"type": "stop"})
    ended = client.recv_until(lambda m: m.get("event") == "session_ended")
    assert ended["summary"]["status"] == "stopped"
    client.close()


def test_pilot_disconnect_ends_session(server):
    srv, host, port = server
    client = NetClient(host, port)
    client.hello()
    client.send({"type": "start"})
    client.recv_until(lambda m: m.get("event") == "session_started")
    client.send({"type": "control_input", "trigger": 0.0})
    client.close()
    deadline = time.monotonic() + 10.0
    while srv._session_running.is_set() and time.monotonic() < deadline:
        time.sleep(0.05)
    assert not srv._session_running.is_set()
    assert srv.last_record is not None
    assert srv.last_record.summary["status"] == "disconnected"


def test_slow_client_drops_telemetry_but_keeps_events():
    from handpilot.server import _Client

    class FakeConn:
        def shutdown(self, _how):
            pass

        def close(self):
            pass

    client = _Client(FakeConn(), role="observer")
    for i in range(300):  # overflow the bounded queue
        client.send({"type": "telemetry", "t_ms": float(i)})
    assert client.queue.qsize() < 300
    client.send({"type": "event", "event": "exercise_completed"})
    drained = []
    while not client.queue.empty():
        drained.append(client.queue.get_nowait())
    assert drained[-1]["type"] == "event"


def test_telemetry_flows_and_scripted_flight_completes(server):
    srv, host, port = server
    pilot_logic = WaypointPilot()
    client = NetClient(host, port)
    client.hello()
    client.send({"type": "configure", "script": "track", "loss_probability": 0.0})
    client.recv_until(lambda m: m["type"] == "configured")
    client.send({"type": "start"})
    client.recv_until(lambda m: m.get("event") == "session_started")

    summary = None
    deadline = time.monotonic() + 60.0
    while time.monotonic() < deadline:
        message = client.recv()
        if message["type"] == "telemetry":
            feedback = {
                "position": message["quad"]["position"],
                "velocity": message["quad"]["velocity"],
                "euler_deg": message["quad"]["euler_deg"],
                "armed": message["quad"]["armed"],
                "exercise_step": message["exercise"]["step"],
                "exercise_status": message["exercise"]["status"],
            }
            state = pilot_logic.sample(message["t_ms"], feedback)
            if state is not None:
                client.send({
                    "type": "control_input",
                    "trigger": state.trigger,
                    "tilt_pitch": state.tilt_pitch,
                    "tilt_roll": state.tilt_roll,
                    "thumbstick_x": state.thumbstick_x,
                    "arm_button": state.arm_button,
                    "timestamp_ms": state.timestamp_ms,
                })
        elif message["type"] == "event" and message["event"] == "session_ended":
            summary = message["summary"]
            break
    client.close()
    assert summary is not None, "session did not end in time"
    assert summary["status"] == "completed"
    assert summary["events"].get("exercise_completed") == 1
