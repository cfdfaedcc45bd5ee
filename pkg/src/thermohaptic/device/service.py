"""Network service around the device core: binary datagrams in, JSON out.

One asyncio control loop owns all simulation state and advances it a
tick at a time; datagram receipt and gateway sessions only enqueue
messages or drain per-client queues, so the loop itself never waits on
a socket. The gateway carries JSON mirrors of the wire frames (field
for field, names as documented next to the byte layout) plus scene
snapshots when a physics scene is attached, which is what the operator
console renders.

Clock modes: realtime paces ticks against the wall clock, accel:<f>
runs f times faster, and stepped advances only when a gateway client
sends a step command, which makes whole service runs reproducible.
"""

from __future__ import annotations

import asyncio
import json
import math
from typing import Optional

import websockets
from websockets.asyncio.server import serve as ws_serve

from ..config import AppConfig, parse_clock
from ..errors import InvalidInputError
from ..physics import (
    DEFAULT_PHYSICS_DT,
    CouplingParams,
    InProgress,
    ProxyPair,
    Scene,
    default_scene,
    indentation,
    physics_step,
    status_label,
    task_step,
)
from ..protocol import (
    Ack,
    Frame,
    HoldPressure,
    IndentationUpdate,
    Telemetry,
    TempSetpoint,
    encode,
)
from .core import DeviceConfig, device_tick, initial_device_state

# Outbound queue bound per gateway client; the oldest event is dropped
# on overflow because a laggy console wants fresh state, not history.
CLIENT_QUEUE_LIMIT = 256
# Realtime pacing resyncs rather than fast-forwards when it falls this
# far behind (suspended laptop, debugger pause).
MAX_CATCHUP_S = 0.25


def frame_to_json(frame: Frame) -> dict:
    """JSON mirror of an outbound frame, field for field."""
    payload = frame.payload
    base = {"seq": frame.seq, "timestamp_us": frame.timestamp_us}
    if isinstance(payload, Telemetry):
        return {
            "type": "telemetry",
            **base,
            "index_temp_c": payload.index_temp_c,
            "thumb_temp_c": payload.thumb_temp_c,
            "index_pressure_kpa": payload.index_pressure_kpa,
            "thumb_pressure_kpa": payload.thumb_pressure_kpa,
            "index_duty": payload.index_duty,
            "thumb_duty": payload.thumb_duty,
        }
    if isinstance(payload, Ack):
        return {"type": "ack", **base, "acked_seq": payload.acked_seq}
    if isinstance(payload, TempSetpoint):
        return {
            "type": "temp_setpoint",
            **base,
            "index_c": None if math.isnan(payload.index_c) else payload.index_c,
            "thumb_c": None if math.isnan(payload.thumb_c) else payload.thumb_c,
        }
    if isinstance(payload, HoldPressure):
        return {"type": "hold_pressure", **base, "kpa": payload.kpa}
    if isinstance(payload, IndentationUpdate):
        return {
            "type": "indentation",
            **base,
            "index_mm": payload.index_mm,
            "thumb_mm": payload.thumb_mm,
        }
    raise InvalidInputError(f"no JSON mirror for {type(payload).__name__}")


def command_from_json(obj: dict):
    """Inbound JSON command -> protocol payload, or None for non-frame
    commands (step, proxy, reset_scene) that the service handles itself."""
    kind = obj.get("type")
    if kind == "temp_setpoint":
        index = obj.get("index_c")
        thumb = obj.get("thumb_c")
        return TempSetpoint(
            index_c=float("nan") if index is None else float(index),
            thumb_c=float("nan") if thumb is None else float(thumb),
        )
    if kind == "hold_pressure":
        return HoldPressure(kpa=float(obj["kpa"]))
    if kind == "indentation":
        return IndentationUpdate(
            index_mm=float(obj["index_mm"]), thumb_mm=float(obj["thumb_mm"])
        )
    return None


class DeviceService:
    """Owns the simulation; exposes start/stop and port numbers."""

    def __init__(
        self,
        app: AppConfig,
        attach_scene: bool = False,
        physics_dt: float = DEFAULT_PHYSICS_DT,
    ) -> None:
        self.app = app
        self.config: DeviceConfig = app.device
        self.clock_mode, self.accel_factor = parse_clock(app.service.clock)
        self.state = initial_device_state(self.config)
        self.inbox: list[bytes] = []
        self.scene: Optional[Scene] = default_scene() if attach_scene else None
        self.coupling: CouplingParams = app.coupling
        self.physics_dt = physics_dt
        self._substeps = round(self.config.dt / physics_dt)
        if abs(self._substeps * physics_dt - self.config.dt) > 1e-12:
            raise InvalidInputError("physics step must divide the control period")
        self.task_status = InProgress()
        self.scene_time_s = 0.0
        self.proxies = self._rest_proxies()
        self._seq = 0
        self._clients: dict[object, asyncio.Queue] = {}
        self._udp_peer = None
        self._udp_transport = None
        self._ws_server = None
        self._loop_task: Optional[asyncio.Task] = None
        self._step_budget = 0
        self._wake = asyncio.Event()
        self._stopping = False
        self.udp_port: Optional[int] = None
        self.gateway_port: Optional[int] = None

    def _rest_proxies(self) -> ProxyPair:
        if self.scene is None:
            return ProxyPair(index_pos=(0.0, 0.0, 0.0), thumb_pos=(0.0, 0.0, 0.0))
        return ProxyPair(
            index_pos=self.scene.sphere_pos[0], thumb_pos=self.scene.sphere_pos[1]
        )

    # -- wire plumbing ------------------------------------------------

    def _next_seq(self) -> int:
        seq = self._seq
        self._seq = (self._seq + 1) & 0xFFFFFFFF
        return seq

    def _enqueue_command(self, payload) -> None:
        frame = Frame(
            seq=self._next_seq(),
            timestamp_us=self.state.time_us,
            payload=payload,
        )
        self.inbox.append(encode(frame))

    def _broadcast(self, event: dict) -> None:
        text = json.dumps(event, separators=(",", ":"))
        for queue in self._clients.values():
            if queue.full():
                try:
                    queue.get_nowait()
                except asyncio.QueueEmpty:
                    pass
            queue.put_nowait(text)

    # -- simulation ---------------------------------------------------

    def _tick(self) -> None:
        if self.scene is not None:
            for _ in range(self._substeps):
                self.scene = physics_step(
                    self.scene, self.proxies, self.coupling, self.physics_dt
                )
                self.scene_time_s += self.physics_dt
                self.task_status = task_step(
                    self.task_status, self.scene, self.scene_time_s
                )
            pair = (self.proxies.index_pos, self.proxies.thumb_pos)
            depths = [
                indentation(pair[j], self.scene.sphere_pos[j], self.scene.contact_flags[j])
                for j in range(2)
            ]
            self._enqueue_command(
                IndentationUpdate(index_mm=depths[0], thumb_mm=depths[1])
            )

        inbox, self.inbox = self.inbox, []
        self.state, outbox = device_tick(self.config, self.state, inbox, self.config.dt)

        emitted_telemetry = False
        for frame in outbox:
            if isinstance(frame.payload, Telemetry):
                emitted_telemetry = True
            self._broadcast(frame_to_json(frame))
            if self._udp_peer is not None and self._udp_transport is not None:
                self._udp_transport.sendto(encode(frame), self._udp_peer)
        if emitted_telemetry and self.scene is not None:
            self._broadcast(self._scene_snapshot())

    def _scene_snapshot(self) -> dict:
        scene = self.scene
        pair = (self.proxies.index_pos, self.proxies.thumb_pos)
        depths = [
            indentation(pair[j], scene.sphere_pos[j], scene.contact_flags[j])
            for j in range(2)
        ]
        return {
            "type": "scene",
            "timestamp_us": self.state.time_us,
            "time_s": round(self.scene_time_s, 6),
            "cube_pos": [round(v, 3) for v in scene.cube_pos],
            "cube_yaw": round(scene.cube_yaw, 5),
            "cube_size": scene.cube_size,
            "spheres": [[round(v, 3) for v in p] for p in scene.sphere_pos],
            "proxies": [[round(v, 3) for v in p] for p in pair],
            "indentation_mm": [round(d, 3) for d in depths],
            "contact": list(scene.contact_flags),
            "status": status_label(self.task_status),
            "stands": [
                {
                    "center_x": s.center_x,
                    "center_y": s.center_y,
                    "half_extent": s.half_extent,
                    "top_height": s.top_height,
                }
                for s in (scene.pickup_stand, scene.target_stand)
            ],
        }

    def _handle_client_command(self, obj: dict) -> None:
        payload = command_from_json(obj)
        if payload is not None:
            self._enqueue_command(payload)
            return
        kind = obj.get("type")
        if kind == "step":
            ticks = int(obj.get("ticks", 1))
            if ticks < 0:
                raise InvalidInputError("step ticks must be >= 0")
            self._step_budget += ticks
            self._wake.set()
        elif kind == "proxy":
            ix, iy, iz = (float(v) for v in obj["index"])
            tx, ty, tz = (float(v) for v in obj["thumb"])
            self.proxies = ProxyPair(index_pos=(ix, iy, iz), thumb_pos=(tx, ty, tz))
        elif kind == "reset_scene":
            if self.scene is not None:
                self.scene = default_scene()
                self.task_status = InProgress()
                self.scene_time_s = 0.0
                self.proxies = self._rest_proxies()
        else:
            raise InvalidInputError(f"unknown gateway command {kind!r}")

    # -- asyncio glue -------------------------------------------------

    async def _ws_handler(self, websocket) -> None:
        queue: asyncio.Queue = asyncio.Queue(maxsize=CLIENT_QUEUE_LIMIT)
        self._clients[websocket] = queue

        async def sender() -> None:
            while True:
                await websocket.send(await queue.get())

        send_task = asyncio.create_task(sender())
        try:
            async for message in websocket:
                try:
                    obj = json.loads(message)
                    if not isinstance(obj, dict):
                        raise InvalidInputError("commands must be JSON objects")
                    self._handle_client_command(obj)
                except (KeyError, TypeError, ValueError, InvalidInputError) as exc:
                    await websocket.send(
                        json.dumps({"type": "error", "message": str(exc)})
                    )
        except websockets.ConnectionClosed:
            pass
        finally:
            send_task.cancel()
            self._clients.pop(websocket, None)

    async def _run_loop(self) -> None:
        dt = self.config.dt
        loop = asyncio.get_running_loop()
        if self.clock_mode == "stepped":
            while not self._stopping:
                if self._step_budget <= 0:
                    self._wake.clear()
                    await self._wake.wait()
                    continue
                self._step_budget -= 1
                self._tick()
                # Yield between ticks so datagrams and gateway commands
                # land in tick order rather than after a whole burst.
                await asyncio.sleep(0)
            return
        wall_dt = dt if self.clock_mode == "realtime" else dt / self.accel_factor
        deadline = loop.time() + wall_dt
        while not self._stopping:
            now = loop.time()
            if deadline - now > MAX_CATCHUP_S or now - deadline > MAX_CATCHUP_S:
                deadline = now + wall_dt
            delay = deadline - now
            if delay > 0:
                await asyncio.sleep(delay)
            self._tick()
            deadline += wall_dt

    async def start(self) -> None:
        loop = asyncio.get_running_loop()
        service = self

        class _UdpProtocol(asyncio.DatagramProtocol):
            def datagram_received(self, data: bytes, addr) -> None:
                service._udp_peer = addr
                service.inbox.append(data)

        try:
            self._udp_transport, _ = await loop.create_datagram_endpoint(
                _UdpProtocol, local_addr=("127.0.0.1", self.app.service.udp_port)
            )
        except OSError as exc:
            raise RuntimeError(
                f"cannot bind UDP port {self.app.service.udp_port}: {exc}"
            ) from exc
        self.udp_port = self._udp_transport.get_extra_info("sockname")[1]

        try:
            self._ws_server = await ws_serve(
                self._ws_handler, "127.0.0.1", self.app.service.gateway_port
            )
        except OSError as exc:
            self._udp_transport.close()
            raise RuntimeError(
                f"cannot bind gateway port {self.app.service.gateway_port}: {exc}"
            ) from exc
        sockets = self._ws_server.sockets
        self.gateway_port = sockets[0].getsockname()[1] if sockets else None

        self._loop_task = asyncio.create_task(self._run_loop())

    async def stop(self) -> None:
        self._stopping = True
        self._wake.set()
        if self._loop_task is not None:
            self._loop_task.cancel()
            try:
                await self._loop_task
            except asyncio.CancelledError:
                pass
        if self._ws_server is not None:
            self._ws_server.close()
            await self._ws_server.wait_closed()
        if self._udp_transport is not None:
            self._udp_transport.close()


async def run_service(app: AppConfig, attach_scene: bool = False) -> None:
    """Serve until cancelled (the CLI wires SIGINT/SIGTERM to cancel)."""
    service = DeviceService(app, attach_scene=attach_scene)
    await service.start()
    print(
        f"device-sim listening: udp 127.0.0.1:{service.udp_port}, "
        f"gateway ws://127.0.0.1:{service.gateway_port} "
        f"(clock {app.service.clock}"
        + (", scene attached)" if attach_scene else ")"),
        flush=True,
    )
    try:
        await asyncio.Event().wait()
    finally:
        await service.stop()
