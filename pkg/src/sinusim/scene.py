"""Workspace geometry: floor patch, goal sphere, forbidden wall.

All lengths in mm. The tool tip is a point; the floor and forbidden
wall are finite rectangular patches, the goal a sphere behind the floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

Vec3 = tuple[float, float, float]

UNIT_TOL = 1e-6
WALL_SLAB_HALF = 0.25  # forbidden wall slab half-thickness, mm


class SceneError(ValueError):
    """Raised for malformed or degenerate scene geometry."""


def _norm(v: Vec3) -> float:
    return math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])


def _sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _dot(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _unitize(v: Vec3, what: str) -> Vec3:
    n = _norm(v)
    if abs(n - 1.0) > UNIT_TOL:
        raise SceneError(f"{what} normal not unit length: |n|={n}")
    return (v[0] / n, v[1] / n, v[2] / n)


def _tangent_frame(normal: Vec3) -> tuple[Vec3, Vec3]:
    # Deterministic in-plane axes: cross with the world axis least
    # aligned with the normal, then complete the right-handed frame.
    ax = min(range(3), key=lambda i: abs(normal[i]))
    e = [0.0, 0.0, 0.0]
    e[ax] = 1.0
    u = (normal[1] * e[2] - normal[2] * e[1],
         normal[2] * e[0] - normal[0] * e[2],
         normal[0] * e[1] - normal[1] * e[0])
    un = _norm(u)
    u = (u[0] / un, u[1] / un, u[2] / un)
    w = (normal[1] * u[2] - normal[2] * u[1],
         normal[2] * u[0] - normal[0] * u[2],
         normal[0] * u[1] - normal[1] * u[0])
    return u, w


@dataclass(frozen=True)
class Patch:
    """Finite rectangular planar patch. ``normal`` points to the approach side."""

    center: Vec3
    normal: Vec3
    half_extents: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "normal", _unitize(self.normal, "patch"))
        if min(self.half_extents) <= 0:
            raise SceneError(f"degenerate patch extents {self.half_extents}")

    def in_footprint(self, tip: Vec3) -> bool:
        u, w = _tangent_frame(self.normal)
        d = _sub(tip, self.center)
        return (abs(_dot(d, u)) <= self.half_extents[0]
                and abs(_dot(d, w)) <= self.half_extents[1])

    def signed_height(self, tip: Vec3) -> float:
        """Distance of tip above the plane along +normal (negative = behind)."""
        return _dot(_sub(tip, self.center), self.normal)


@dataclass(frozen=True)
class Sphere:
    center: Vec3
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise SceneError(f"sphere radius must be > 0, got {self.radius}")

    def contains(self, tip: Vec3) -> bool:
        return _norm(_sub(tip, self.center)) <= self.radius


@dataclass(frozen=True)
class SceneConfig:
    floor: Patch
    goal: Sphere
    forbidden: Patch
    workspace_bounds: tuple[Vec3, Vec3]  # (min corner, max corner)

    def __post_init__(self):
        lo, hi = self.workspace_bounds
        if any(l >= h for l, h in zip(lo, hi)):
            raise SceneError("workspace bounds box is degenerate")
        # Goal must sit behind the floor plane, opposite the approach side.
        if self.floor.signed_height(self.goal.center) >= 0:
            raise SceneError("goal center must lie behind the floor plane")


@dataclass(frozen=True)
class ContactSet:
    floor_contact: bool
    penetration: float
    goal_hit: bool
    forbidden_hit: bool


def default_scene() -> SceneConfig:
    return SceneConfig(
        floor=Patch((0.0, 0.0, 0.0), (0.0, 0.0, 1.0), (20.0, 20.0)),
        goal=Sphere((0.0, 0.0, -25.0), 2.0),
        forbidden=Patch((0.0, 0.0, -30.0), (0.0, 0.0, 1.0), (20.0, 20.0)),
        workspace_bounds=((-20.0, -20.0, -35.0), (20.0, 20.0, 15.0)),
    )


def penetration_depth(tip: Vec3, floor: Patch) -> float:
    """Depth of the tip beyond the floor plane, 0 outside the footprint."""
    if not floor.in_footprint(tip):
        return 0.0
    return max(0.0, -floor.signed_height(tip))


def classify_contacts(tip: Vec3, scene: SceneConfig) -> ContactSet:
    depth = penetration_depth(tip, scene.floor)
    forbidden = (scene.forbidden.in_footprint(tip)
                 and abs(scene.forbidden.signed_height(tip)) <= WALL_SLAB_HALF)
    return ContactSet(
        floor_contact=depth > 0.0,
        penetration=depth,
        goal_hit=scene.goal.contains(tip),
        forbidden_hit=forbidden,
    )


def _vec3(raw, what: str) -> Vec3:
    if not isinstance(raw, (list, tuple)) or len(raw) != 3:
        raise SceneError(f"{what} must be a 3-vector, got {raw!r}")
    return (float(raw[0]), float(raw[1]), float(raw[2]))


def load_scene(doc: dict) -> SceneConfig:
    """Build a validated SceneConfig from a parsed config mapping."""
    if not isinstance(doc, dict):
        raise SceneError("scene config must be a mapping")
    try:
        floor = doc["floor"]
        goal = doc["goal"]
        forbidden = doc["forbidden"]
        bounds = doc["workspace_bounds"]
    except KeyError as exc:
        raise SceneError(f"scene config missing section {exc}") from exc

    def patch(raw, what):
        try:
            return Patch(
                center=_vec3(raw["center"], f"{what}.center"),
                normal=_vec3(raw["normal"], f"{what}.normal"),
                half_extents=(float(raw["half_extents"][0]),
                              float(raw["half_extents"][1])),
            )
        except (KeyError, TypeError, IndexError) as exc:
            raise SceneError(f"malformed {what} patch: {exc}") from exc

    try:
        sphere = Sphere(center=_vec3(goal["center"], "goal.center"),
                        radius=float(goal["radius"]))
        lo = _vec3(bounds["min"], "workspace_bounds.min")
        hi = _vec3(bounds["max"], "workspace_bounds.max")
    except (KeyError, TypeError) as exc:
        raise SceneError(f"malformed scene config: {exc}") from exc
    return SceneConfig(floor=patch(floor, "floor"), goal=sphere,
                       forbidden=patch(forbidden, "forbidden"),
                       workspace_bounds=(lo, hi))


def scene_to_dict(scene: SceneConfig) -> dict:
    return {
        "floor": {"center": list(scene.floor.center),
                  "normal": list(scene.floor.normal),
                  "half_extents": list(scene.floor.half_extents)},
        "goal": {"center": list(scene.goal.center),
                 "radius": scene.goal.radius},
        "forbidden": {"center": list(scene.forbidden.center),
                      "normal": list(scene.forbidden.normal),
                      "half_extents": list(scene.forbidden.half_extents)},
        "workspace_bounds": {"min": list(scene.workspace_bounds[0]),
                             "max": list(scene.workspace_bounds[1])},
    }
