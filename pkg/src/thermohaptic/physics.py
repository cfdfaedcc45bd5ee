"""Virtual manipulation world: coupled fingertip spheres, a grippable cube,
stands, and the pick-and-place task monitor.

Units are mm, g, N, s throughout (1 N on 1 g = 1e6 mm/s^2).

Each tracked fingertip drives a collision sphere through a spring-damper
coupling.  The sphere never penetrates the cube: after integration it is
projected back to the surface, so the proxy-to-sphere distance is exactly
the virtual indentation the device renders.  The cube feels the normal
component of each coupling spring as a penalty force that grows with how
deep the proxy has pushed past the face, plus Coulomb friction capped at
mu times that normal force.  Friction is resolved as a per-contact
impulse that cancels up to the capped amount of tangential slip each
step (exact stiction below the cap), applied in a fixed order: index
finger, thumb, support.  A force-law viscous model is not stable at this
step size with gram-scale masses.

The cube translates only.  Its yaw is scene data used for collision
geometry; grasp torques are not modeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

from .errors import InvalidInputError, SimulationDivergedError

Vec3 = tuple[float, float, float]

GRAVITY_MM_S2 = 9810.0
MAX_PHYSICS_DT = 0.005
DEFAULT_PHYSICS_DT = 0.001

SUPPORT_STIFFNESS_N_MM = 5.0
SUPPORT_DAMPING_N_S_MM = 0.05
FRICTION_MU = 0.8

SCENE_CSV_HEADER = (
    "time_s,index_indent_mm,thumb_indent_mm,cube_x,cube_y,cube_z,status"
)


@dataclass(frozen=True)
class ProxyPair:
    index_pos: Vec3
    thumb_pos: Vec3

    def __post_init__(self):
        for v in (*self.index_pos, *self.thumb_pos):
            if not math.isfinite(v):
                raise InvalidInputError("proxy coordinates must be finite")


@dataclass(frozen=True)
class CouplingParams:
    spring_stiffness: float = 1.0   # N/mm
    spring_damping: float = 0.003   # N*s/mm
    sphere_radius: float = 10.0     # mm
    sphere_mass: float = 5.0        # g

    def __post_init__(self):
        if not (math.isfinite(self.spring_stiffness) and self.spring_stiffness > 0.0):
            raise InvalidInputError("spring_stiffness must be finite and > 0")
        if not (math.isfinite(self.spring_damping) and self.spring_damping >= 0.0):
            raise InvalidInputError("spring_damping must be finite and >= 0")
        if not (math.isfinite(self.sphere_radius) and self.sphere_radius > 0.0):
            raise InvalidInputError("sphere_radius must be finite and > 0")
        if not (math.isfinite(self.sphere_mass) and self.sphere_mass > 0.0):
            raise InvalidInputError("sphere_mass must be finite and > 0")


DEFAULT_COUPLING = CouplingParams()


@dataclass(frozen=True)
class Stand:
    """Square axis-aligned pedestal: a region in x/y plus a top height."""

    center_x: float
    center_y: float
    half_extent: float
    top_height: float

    def contains(self, x: float, y: float) -> bool:
        return (
            abs(x - self.center_x) <= self.half_extent
            and abs(y - self.center_y) <= self.half_extent
        )


@dataclass(frozen=True)
class Scene:
    sphere_pos: tuple[Vec3, Vec3]
    sphere_vel: tuple[Vec3, Vec3]
    cube_pos: Vec3
    cube_yaw: float
    cube_vel: Vec3
    cube_size: float      # full edge length, mm
    cube_mass: float      # g
    pickup_stand: Stand
    target_stand: Stand
    floor_height: float
    contact_flags: tuple[bool, bool] = (False, False)

    def is_finite(self) -> bool:
        flat = (
            *self.sphere_pos[0], *self.sphere_pos[1],
            *self.sphere_vel[0], *self.sphere_vel[1],
            *self.cube_pos, self.cube_yaw, *self.cube_vel,
        )
        return all(math.isfinite(v) for v in flat)


def default_scene() -> Scene:
    """Pick-and-place setup: cube waiting on the pickup stand."""
    pickup = Stand(center_x=-60.0, center_y=0.0, half_extent=25.0, top_height=40.0)
    target = Stand(center_x=60.0, center_y=0.0, half_extent=15.0, top_height=30.0)
    cube_size = 40.0
    start: Vec3 = (-60.0, 0.0, pickup.top_height + cube_size / 2.0)
    rest_offset = cube_size / 2.0 + DEFAULT_COUPLING.sphere_radius + 15.0
    return Scene(
        sphere_pos=(
            (start[0], start[1] - rest_offset, start[2]),
            (start[0], start[1] + rest_offset, start[2]),
        ),
        sphere_vel=((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
        cube_pos=start,
        cube_yaw=0.0,
        cube_vel=(0.0, 0.0, 0.0),
        cube_size=cube_size,
        cube_mass=100.0,
        pickup_stand=pickup,
        target_stand=target,
        floor_height=0.0,
    )


def grip_threshold_force(scene: Scene, mu: float = FRICTION_MU) -> float:
    """Per-finger normal force below which a two-finger grip cannot hold the cube."""
    weight_n = scene.cube_mass * GRAVITY_MM_S2 * 1e-6
    return weight_n / (2.0 * mu)


def support_height_at(scene: Scene, x: float, y: float) -> float:
    """Height of whatever surface would carry the cube centered at (x, y)."""
    h = scene.floor_height
    for stand in (scene.pickup_stand, scene.target_stand):
        if stand.contains(x, y) and stand.top_height > h:
            h = stand.top_height
    return h


def indentation(proxy: Vec3, sphere_pos: Vec3, contact: bool = True) -> float:
    """Proxy-to-sphere distance in mm; zero unless the sphere is in contact."""
    for v in (*proxy, *sphere_pos):
        if not math.isfinite(v):
            raise InvalidInputError("positions must be finite")
    if not contact:
        return 0.0
    dx = proxy[0] - sphere_pos[0]
    dy = proxy[1] - sphere_pos[1]
    dz = proxy[2] - sphere_pos[2]
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def interaction_force(indentation_mm: float, stiffness: float) -> float:
    """Rendered fingertip force in N: indentation times virtual stiffness."""
    if not (math.isfinite(indentation_mm) and indentation_mm >= 0.0):
        raise InvalidInputError("indentation must be finite and >= 0")
    if not (math.isfinite(stiffness) and stiffness > 0.0):
        raise InvalidInputError("stiffness must be finite and > 0")
    return indentation_mm * stiffness


def _sphere_cube_contact(
    center: Vec3, radius: float, scene: Scene
) -> tuple[float, Vec3] | None:
    """Penetration depth and outward (cube to sphere) unit normal, or None.

    Works in the cube's yaw frame so posed scenes collide correctly.
    """
    cx, cy, cz = scene.cube_pos
    half = scene.cube_size / 2.0
    cos_y = math.cos(scene.cube_yaw)
    sin_y = math.sin(scene.cube_yaw)
    # world -> cube frame
    rx = center[0] - cx
    ry = center[1] - cy
    rz = center[2] - cz
    lx = cos_y * rx + sin_y * ry
    ly = -sin_y * rx + cos_y * ry
    lz = rz

    qx = min(max(lx, -half), half)
    qy = min(max(ly, -half), half)
    qz = min(max(lz, -half), half)
    dx, dy, dz = lx - qx, ly - qy, lz - qz
    dist_sq = dx * dx + dy * dy + dz * dz

    if dist_sq > 0.0:
        dist = math.sqrt(dist_sq)
        if dist >= radius:
            return None
        nx, ny, nz = dx / dist, dy / dist, dz / dist
        depth = radius - dist
    else:
        # center inside the cube: exit through the nearest face
        gaps = (half - abs(lx), half - abs(ly), half - abs(lz))
        axis = gaps.index(min(gaps))
        sign = [1.0 if v >= 0.0 else -1.0 for v in (lx, ly, lz)][axis]
        nx, ny, nz = [
            (sign, 0.0, 0.0),
            (0.0, sign, 0.0),
            (0.0, 0.0, sign),
        ][axis]
        depth = radius + gaps[axis]

    # cube frame -> world
    wx = cos_y * nx - sin_y * ny
    wy = sin_y * nx + cos_y * ny
    return depth, (wx, wy, nz)


def physics_step(
    scene: Scene, proxies: ProxyPair, params: CouplingParams, dt: float
) -> Scene:
    """Advance the world one fixed step (semi-implicit Euler)."""
    if not (math.isfinite(dt) and 0.0 < dt <= MAX_PHYSICS_DT):
        raise InvalidInputError(f"dt {dt!r} must be in (0, {MAX_PHYSICS_DT}]")
    if not scene.is_finite():
        raise SimulationDivergedError("scene state is non-finite")

    k = params.spring_stiffness
    c = params.spring_damping
    radius = params.sphere_radius
    inv_sphere_m = 1e6 / params.sphere_mass  # (N -> mm/s^2)

    cube_vx, cube_vy, cube_vz = scene.cube_vel
    cube_fx = 0.0
    cube_fy = 0.0
    cube_fz = -scene.cube_mass * GRAVITY_MM_S2 * 1e-6  # weight, N

    new_pos: list[Vec3] = []
    new_vel: list[Vec3] = []
    flags: list[bool] = []
    # (normal force N, contact normal, velocity of the other body)
    friction_contacts: list[tuple[float, Vec3, Vec3]] = []

    for i, proxy in enumerate((proxies.index_pos, proxies.thumb_pos)):
        px, py, pz = scene.sphere_pos[i]
        vx, vy, vz = scene.sphere_vel[i]

        fx = k * (proxy[0] - px) - c * vx
        fy = k * (proxy[1] - py) - c * vy
        fz = k * (proxy[2] - pz) - c * vz

        vx += fx * inv_sphere_m * dt
        vy += fy * inv_sphere_m * dt
        vz += fz * inv_sphere_m * dt
        px += vx * dt
        py += vy * dt
        pz += vz * dt

        hit = _sphere_cube_contact((px, py, pz), radius, scene)
        if hit is not None:
            depth, (nx, ny, nz) = hit
            # project the sphere back to the surface and kill approach speed
            px += nx * depth
            py += ny * depth
            pz += nz * depth
            rel_vn = (vx - cube_vx) * nx + (vy - cube_vy) * ny + (vz - cube_vz) * nz
            if rel_vn < 0.0:
                vx -= rel_vn * nx
                vy -= rel_vn * ny
                vz -= rel_vn * nz

            # spring force recomputed at the projected position; its push
            # into the face is the penalty normal force the cube feels
            sfx = k * (proxy[0] - px) - c * vx
            sfy = k * (proxy[1] - py) - c * vy
            sfz = k * (proxy[2] - pz) - c * vz
            press = -(sfx * nx + sfy * ny + sfz * nz)
            if press > 0.0:
                cube_fx -= press * nx
                cube_fy -= press * ny
                cube_fz -= press * nz
                friction_contacts.append((press, (nx, ny, nz), (vx, vy, vz)))
            flags.append(True)
        else:
            flags.append(False)

        new_pos.append((px, py, pz))
        new_vel.append((vx, vy, vz))

    # cube support: floor or whichever stand is under its center
    half = scene.cube_size / 2.0
    cx, cy, cz = scene.cube_pos
    support = support_height_at(scene, cx, cy)
    pen = support - (cz - half)
    if pen > 0.0:
        normal = SUPPORT_STIFFNESS_N_MM * pen - SUPPORT_DAMPING_N_S_MM * cube_vz
        if normal > 0.0:
            cube_fz += normal
            friction_contacts.append((normal, (0.0, 0.0, 1.0), (0.0, 0.0, 0.0)))

    inv_cube_m = 1e6 / scene.cube_mass
    cube_vx += cube_fx * inv_cube_m * dt
    cube_vy += cube_fy * inv_cube_m * dt
    cube_vz += cube_fz * inv_cube_m * dt

    # Coulomb friction as sequential impulses: each contact removes
    # tangential slip up to mu*N*dt worth of impulse (stick when it can)
    for press, (nx, ny, nz), (ovx, ovy, ovz) in friction_contacts:
        rvx = cube_vx - ovx
        rvy = cube_vy - ovy
        rvz = cube_vz - ovz
        rn = rvx * nx + rvy * ny + rvz * nz
        tvx = rvx - rn * nx
        tvy = rvy - rn * ny
        tvz = rvz - rn * nz
        tspeed = math.sqrt(tvx * tvx + tvy * tvy + tvz * tvz)
        if tspeed <= 0.0:
            continue
        max_dv = FRICTION_MU * press * dt * inv_cube_m
        dv = min(tspeed, max_dv)
        cube_vx -= dv * tvx / tspeed
        cube_vy -= dv * tvy / tspeed
        cube_vz -= dv * tvz / tspeed

    new_cube_pos = (cx + cube_vx * dt, cy + cube_vy * dt, cz + cube_vz * dt)

    out = replace(
        scene,
        sphere_pos=(new_pos[0], new_pos[1]),
        sphere_vel=(new_vel[0], new_vel[1]),
        cube_pos=new_cube_pos,
        cube_vel=(cube_vx, cube_vy, cube_vz),
        contact_flags=(flags[0], flags[1]),
    )
    if not out.is_finite():
        raise SimulationDivergedError("physics step produced non-finite state")
    return out


@dataclass(frozen=True)
class TaskParams:
    dwell_s: float = 1.0
    stability_speed_mm_s: float = 5.0
    timeout_s: float = 60.0
    drop_margin_mm: float = 5.0
    rest_tolerance_mm: float = 2.0


DEFAULT_TASK_PARAMS = TaskParams()


@dataclass(frozen=True)
class InProgress:
    dwell_start: float | None = None


@dataclass(frozen=True)
class Success:
    time: float


@dataclass(frozen=True)
class Failed:
    reason: str  # "dropped" | "timeout"


TaskStatus = Union[InProgress, Success, Failed]


def _resting_on_target(scene: Scene, params: TaskParams) -> bool:
    cx, cy, cz = scene.cube_pos
    stand = scene.target_stand
    if not stand.contains(cx, cy):
        return False
    bottom = cz - scene.cube_size / 2.0
    if abs(bottom - stand.top_height) > params.rest_tolerance_mm:
        return False
    vx, vy, vz = scene.cube_vel
    speed = math.sqrt(vx * vx + vy * vy + vz * vz)
    return speed < params.stability_speed_mm_s


def task_step(
    status: TaskStatus,
    scene: Scene,
    t: float,
    params: TaskParams = DEFAULT_TASK_PARAMS,
) -> TaskStatus:
    """Advance the pick-and-place monitor; Success and Failed are absorbing.

    The drop test fires when the cube center reaches floor level plus
    half a cube and a small margin, i.e. the cube has physically landed
    somewhere no stand is.
    """
    if not isinstance(status, InProgress):
        return status
    drop_level = scene.floor_height + scene.cube_size / 2.0 + params.drop_margin_mm
    if scene.cube_pos[2] < drop_level:
        return Failed(reason="dropped")
    if t >= params.timeout_s:
        return Failed(reason="timeout")
    if _resting_on_target(scene, params):
        start = status.dwell_start if status.dwell_start is not None else t
        if t - start >= params.dwell_s:
            return Success(time=t)
        return InProgress(dwell_start=start)
    return InProgress(dwell_start=None)


def status_label(status: TaskStatus) -> str:
    if isinstance(status, InProgress):
        return "in_progress"
    if isinstance(status, Success):
        return "success"
    return f"failed_{status.reason}"
