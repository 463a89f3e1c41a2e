"""Live session service.

Speaks newline-delimited JSON over a TCP stream socket; docs/protocol.md is
the message reference (format 1). One session runs at a time: the first
client to say hello becomes the pilot, later clients observe. The simulation
loop owns all state on its own thread; network I/O only touches it through
the input holder, the stop flag, and the telemetry fan-out queues, which drop
telemetry frames (never events, never sim ticks) when a client reads slowly.
"""

from __future__ import annotations

import json
import queue
import socket
import threading
import time
from dataclasses import replace
from pathlib import Path

from .course import course_to_dict
from .link import LinkConfig
from .mapping import ControllerState
from .session import InputEnded, SessionConfig, run_session

PROTOCOL_VERSION = 1
CLIENT_QUEUE_SIZE = 256

# configure-message keys a pilot may override before starting
_LINK_KEYS = ("packet_rate", "latency_ms", "loss_probability", "rng_seed",
              "failsafe_timeout_ms")


class LiveInput:
    """Latest-wins holder bridging the reader thread and the session loop."""

    def __init__(self):
        self._lock = threading.Lock()
        self._latest: ControllerState | None = None
        self._fresh = False
        self._disconnected = False

    def push(self, state: ControllerState) -> None:
        with self._lock:
            self._latest = state
            self._fresh = True

    def disconnect(self) -> None:
        with self._lock:
            self._disconnected = True

    def sample(self, t_ms: float, feedback: dict | None) -> ControllerState | None:
        with self._lock:
            if self._disconnected:
                raise InputEnded("input_disconnect")
            if not self._fresh:
                return None
            self._fresh = False
            return self._latest


class _Client:
    def __init__(self, conn: socket.socket, role: str):
        self.conn = conn
        self.role = role
        self.queue: queue.Queue = queue.Queue(maxsize=CLIENT_QUEUE_SIZE)
        self.alive = True
        self.warned_before_start = False

    def send(self, message: dict) -> None:
        """Enqueue a message; telemetry drops when the client lags."""
        try:
            self.queue.put_nowait(message)
        except queue.Full:
            if message.get("type") == "telemetry":
                return
            try:
                self.queue.get_nowait()
            except queue.Empty:
                pass
            try:
                self.queue.put_nowait(message)
            except queue.Full:
                pass


class SessionServer:
    def __init__(self, config: SessionConfig, host: str = "127.0.0.1", port: int = 0,
                 realtime: bool = True, speed: float = 1.0, record_dir: str | None = None):
        self.base_config = config
        self.host = host
        self.port = port
        self.realtime = realtime
        self.speed = speed
        self.record_dir = Path(record_dir) if record_dir else None
        self.last_record = None

        self._listener: socket.socket | None = None
        self._lock = threading.Lock()
        self._clients: list[_Client] = []
        self._pilot: _Client | None = None
        self._threads: list[threading.Thread] = []
        self._shutdown = threading.Event()
        self._session_thread: threading.Thread | None = None
        self._session_stop = threading.Event()
        self._live_input: LiveInput | None = None
        self._session_config = config
        self._session_running = threading.Event()

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> tuple[str, int]:
        self._listener = socket.create_server((self.host, self.port))
        self.host, self.port = self._listener.getsockname()[:2]
        t = threading.Thread(target=self._accept_loop, name="accept", daemon=True)
        t.start()
        self._threads.append(t)
        return self.host, self.port

    def stop(self) -> None:
        self._shutdown.set()
        self._session_stop.set()
        if self._live_input is not None:
            self._live_input.disconnect()
        if self._listener is not None:
            try:
                self._listener.close()
            except OSError:
                pass
        with self._lock:
            clients = list(self._clients)
        for client in clients:
            self._drop_client(client)
        if self._session_thread is not None:
            self._session_thread.join(timeout=5.0)

    def wait(self) -> None:
        while not self._shutdown.is_set():
            time.sleep(0.2)

    # -- client plumbing ----------------------------------------------------

    def _accept_loop(self) -> None:
        while not self._shutdown.is_set():
            try:
                conn, _addr = self._listener.accept()
            except OSError:
                return
            with self._lock:
                role = "pilot" if self._pilot is None else "observer"
            client = _Client(conn, role)
            with self._lock:
                self._clients.append(client)
                if role == "pilot":
                    self._pilot = client
            reader = threading.Thread(target=self._reader_loop, args=(client,), daemon=True)
            writer = threading.Thread(target=self._writer_loop, args=(client,), daemon=True)
            reader.start()
            writer.start()
            self._threads.extend((reader, writer))

    @staticmethod
    def _flush_client(client: _Client, timeout: float = 1.0) -> None:
        deadline = time.monotonic() + timeout
        while not client.queue.empty() and time.monotonic() < deadline:
            time.sleep(0.01)

    def _drop_client(self, client: _Client) -> None:
        client.alive = False
        try:
            client.conn.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            client.conn.close()
        except OSError:
            pass
        with self._lock:
            if client in self._clients:
                self._clients.remove(client)
            if self._pilot is client:
                self._pilot = None
                if self._live_input is not None:
                    self._live_input.disconnect()

    def _writer_loop(self, client: _Client) -> None:
        while client.alive and not self._shutdown.is_set():
            try:
                message = client.queue.get(timeout=0.2)
            except queue.Empty:
                continue
            try:
                client.conn.sendall((json.dumps(message) + "\n").encode("utf-8"))
            except OSError:
                self._drop_client(client)
                return

    def _reader_loop(self, client: _Client) -> None:
        greeted = False
        fh = client.conn.makefile("r", encoding="utf-8", newline="\n")
        try:
            for line in fh:
                if not line.strip():
                    continue
                try:
                    message = json.loads(line)
                    if not isinstance(message, dict) or "type" not in message:
                        raise ValueError("not an object with a type")
                except (json.JSONDecodeError, ValueError) as exc:
                    client.send({"type": "error", "error": "malformed", "detail": str(exc)})
                    continue
                if not greeted:
                    if message.get("type") != "hello":
                        client.send({"type": "error", "error": "hello_required"})
                        continue
                    if message.get("version") != PROTOCOL_VERSION:
                        client.send({"type": "error", "error": "unsupported_version",
                                     "detail": f"server speaks version {PROTOCOL_VERSION}"})
                        self._flush_client(client)
                        break
                    greeted = True
                    client.send({
                        "type": "welcome",
                        "version": PROTOCOL_VERSION,
                        "role": client.role,
                        "courses": [self.base_config.course.name],
                        "scripts": sorted(self.base_config.course.scripts),
                    })
                    continue
                self._handle(client, message)
        except OSError:
            pass
        finally:
            self._drop_client(client)

    # -- message handling ---------------------------------------------------

    def _handle(self, client: _Client, message: dict) -> None:
        kind = message["type"]
        if kind == "control_input":
            self._handle_control(client, message)
        elif kind == "configure":
            self._handle_configure(client, message)
        elif kind == "start":
            self._handle_start(client)
        elif kind == "stop":
            if client.role != "pilot":
                client.send({"type": "error", "error": "observer_only"})
                return
            self._session_stop.set()
        elif kind == "list_courses":
            client.send({"type": "courses",
                         "courses": [self.base_config.course.name],
                         "scripts": sorted(self.base_config.course.scripts)})
        elif kind == "get_course":
            client.send({"type": "course",
                         "course": course_to_dict(self._session_config.course)})
        else:
            client.send({"type": "error", "error": "unknown_type", "detail": kind})

    def _handle_control(self, client: _Client, message: dict) -> None:
        if client.role != "pilot":
            client.send({"type": "error", "error": "observer_only"})
            return
        if not self._session_running.is_set():
            if not client.warned_before_start:
                client.warned_before_start = True
                client.send({"type": "event", "event": "warning",
                             "detail": "control_input before start is ignored"})
            return
        try:
            state = ControllerState(
                trigger=float(message.get("trigger", 0.0)),
                tilt_pitch=float(message.get("tilt_pitch", 0.0)),
                tilt_roll=float(message.get("tilt_roll", 0.0)),
                thumbstick_x=float(message.get("thumbstick_x", 0.0)),
                arm_button=bool(message.get("arm_button", False)),
                timestamp_ms=float(message.get("timestamp_ms", 0.0)),
            )
        except (TypeError, ValueError) as exc:
            client.send({"type": "error", "error": "bad_control_input", "detail": str(exc)})
            return
        self._live_input.push(state)

    def _handle_configure(self, client: _Client, message: dict) -> None:
        if client.role != "pilot":
            client.send({"type": "error", "error": "observer_only"})
            return
        if self._session_running.is_set():
            client.send({"type": "error", "error": "session_running"})
            return
        cfg = self._session_config
        try:
            if "script" in message:
                cfg = replace(cfg, script_name=message["script"])
            link_overrides = {k: message[k] for k in _LINK_KEYS if k in message}
            if link_overrides:
                current = cfg.to_dict()["link"]
                current.update(link_overrides)
                cfg = replace(cfg, link=LinkConfig.from_mapping(current))
            if "max_duration_s" in message:
                cfg = replace(cfg, max_duration_s=float(message["max_duration_s"]))
        except (KeyError, TypeError, ValueError) as exc:
            client.send({"type": "error", "error": "bad_configure", "detail": str(exc)})
            return
        self._session_config = cfg
        client.send({"type": "configured", "script": cfg.script_name})

    def _handle_start(self, client: _Client) -> None:
        if client.role != "pilot":
            client.send({"type": "error", "error": "observer_only"})
            return
        if self._session_running.is_set():
            client.send({"type": "error", "error": "session_running"})
            return
        self._live_input = LiveInput()
        self._session_stop = threading.Event()
        self._session_running.set()
        self._session_thread = threading.Thread(target=self._session_main, daemon=True)
        self._session_thread.start()

    def _broadcast(self, message: dict) -> None:
        with self._lock:
            clients = list(self._clients)
        for target in clients:
            target.send(message)

    def _session_main(self) -> None:
        self._broadcast({"type": "event", "event": "session_started",
                         "script": self._session_config.script_name})
        try:
            record = run_session(
                self._session_config, self._live_input,
                telemetry_sink=self._broadcast,
                stop_flag=self._session_stop,
                realtime=self.realtime, speed=self.speed,
                started_unix_ms=int(time.time() * 1000),
            )
        except Exception as exc:  # surface faults to clients rather than dying silently
            self._session_running.clear()
            self._broadcast({"type": "error", "error": "session_fault", "detail": str(exc)})
            return
        self.last_record = record
        self._session_running.clear()
        if self.record_dir is not None:
            self.record_dir.mkdir(parents=True, exist_ok=True)
            name = f"session-{record.header['started_unix_ms']}.jsonl"
            record.save(self.record_dir / name)
        self._broadcast({"type": "event", "event": "session_ended",
                         "summary": record.summary})
