"""Procedural multi-object scene composition.

Scenes are built from a catalog of box-shaped furniture templates. Objects
are sampled (category distribution, scale jitter, random yaw), placed one by
one starting at the origin, and pushed outward along a random ground-plane
direction until their axis-aligned bounding boxes no longer overlap. The
finished composite is rescaled so the longest axis of its union bounding box
is exactly 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

CATEGORIES = ("bed", "bookshelf", "cabinet", "chair", "nightstand", "sofa", "table")

MIN_OBJECTS = 3
MAX_OBJECTS = 6
PUSH_STEP = 0.01
MAX_PUSH_STEPS = 10_000


class PlacementError(RuntimeError):
    """Raised when an object cannot be pushed to a collision-free spot."""

    def __init__(self, object_index: int, max_steps: int):
        self.object_index = object_index
        super().__init__(
            f"object {object_index} found no collision-free position "
            f"within {max_steps} push steps"
        )


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned box given by per-axis lower/upper corners."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != (3,) or hi.shape != (3,):
            raise ValueError("Aabb corners must be 3-vectors")
        if np.any(lo > hi):
            raise ValueError(f"malformed Aabb: lo={lo} exceeds hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def sizes(self) -> np.ndarray:
        return self.hi - self.lo

    def union(self, other: "Aabb") -> "Aabb":
        return Aabb(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def contains_point(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))


def aabb_intersects(a: Aabb, b: Aabb) -> bool:
    """True iff the boxes overlap with positive volume.

    Touching faces (shared boundary, zero-volume contact) do not count.
    """
    return bool(np.all(a.lo < b.hi) and np.all(b.lo < a.hi))


@dataclass(frozen=True)
class ObjectTemplate:
    """One catalog entry: a colored box of a given furniture category."""

    template_id: int
    category: str
    half_extents: np.ndarray  # (3,), y is up
    base_color: np.ndarray  # (3,) RGB in [0, 1]

    def __post_init__(self):
        he = np.asarray(self.half_extents, dtype=float)
        col = np.asarray(self.base_color, dtype=float)
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")
        if he.shape != (3,) or np.any(he <= 0):
            raise ValueError("half_extents must be 3 strictly positive values")
        if col.shape != (3,) or np.any(col < 0) or np.any(col > 1):
            raise ValueError("base_color must be RGB in [0, 1]")
        object.__setattr__(self, "half_extents", he)
        object.__setattr__(self, "base_color", col)


def validate_catalog(catalog: list[ObjectTemplate]) -> None:
    if not catalog:
        raise ValueError("catalog is empty")
    ids = [t.template_id for t in catalog]
    if len(set(ids)) != len(ids):
        raise ValueError("template_id values must be unique within a catalog")


def rotated_half_extents(half_extents, scale: float, yaw: float) -> np.ndarray:
    """World-axis half extents of a box scaled then rotated by yaw about y."""
    h = np.asarray(half_extents, dtype=float) * scale
    c, s = abs(math.cos(yaw)), abs(math.sin(yaw))
    return np.array([h[0] * c + h[2] * s, h[1], h[0] * s + h[2] * c])


@dataclass(frozen=True)
class PlacedObject:
    """A catalog template instantiated in the scene (raw, pre-normalization)."""

    instance_id: int
    template_id: int
    category: str
    scale: float
    yaw: float
    translation: np.ndarray
    half_extents: np.ndarray  # template half extents, unscaled
    color: np.ndarray

    @property
    def aabb(self) -> Aabb:
        h = rotated_half_extents(self.half_extents, self.scale, self.yaw)
        t = np.asarray(self.translation, dtype=float)
        return Aabb(t - h, t + h)


@dataclass(frozen=True)
class OrientedBox:
    """Renderer-facing box in normalized scene coordinates."""

    instance_id: int
    center: np.ndarray
    half_extents: np.ndarray  # scaled and normalized, pre-rotation
    yaw: float
    color: np.ndarray

    @property
    def aabb(self) -> Aabb:
        h = rotated_half_extents(self.half_extents, 1.0, self.yaw)
        return Aabb(self.center - h, self.center + h)


@dataclass(frozen=True)
class SceneComposite:
    """A collision-free set of placed objects plus its normalization factor.

    Placement fields on the objects are stored raw (scale in [0.95, 1.05],
    translations in catalog units). ``normalization_factor`` is the scalar
    multiplier that maps raw coordinates into normalized scene space, where
    the longest axis of the union bounding box equals 1. ``oriented_boxes``
    applies it.
    """

    objects: tuple[PlacedObject, ...]
    seed: int
    normalization_factor: float

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    def union_aabb(self, normalized: bool = False) -> Aabb:
        box = self.objects[0].aabb
        for obj in self.objects[1:]:
            box = box.union(obj.aabb)
        if normalized:
            f = self.normalization_factor
            box = Aabb(box.lo * f, box.hi * f)
        return box

    def oriented_boxes(self) -> list[OrientedBox]:
        f = self.normalization_factor
        return [
            OrientedBox(
                instance_id=o.instance_id,
                center=np.asarray(o.translation) * f,
                half_extents=np.asarray(o.half_extents) * o.scale * f,
                yaw=o.yaw,
                color=np.asarray(o.color),
            )
            for o in self.objects
        ]

    def to_json_dict(self) -> dict:
        return {
            "seed": int(self.seed),
            "normalization_factor": float(self.normalization_factor),
            "objects": [
                {
                    "instance_id": o.instance_id,
                    "template_id": o.template_id,
                    "category": o.category,
                    "scale": float(o.scale),
                    "yaw": float(o.yaw),
                    "translation": [float(v) for v in o.translation],
                    "half_extents": [float(v) for v in o.half_extents],
                    "color": [float(v) for v in o.color],
                }
                for o in self.objects
            ],
        }

    @staticmethod
    def from_json_dict(d: dict) -> "SceneComposite":
        objects = tuple(
            PlacedObject(
                instance_id=int(o["instance_id"]),
                template_id=int(o["template_id"]),
                category=o["category"],
                scale=float(o["scale"]),
                yaw=float(o["yaw"]),
                translation=np.array(o["translation"], dtype=float),
                half_extents=np.array(o["half_extents"], dtype=float),
                color=np.array(o["color"], dtype=float),
            )
            for o in d["objects"]
        )
        return SceneComposite(
            objects=objects,
            seed=int(d["seed"]),
            normalization_factor=float(d["normalization_factor"]),
        )


def sample_placement_direction(rng) -> np.ndarray:
    """Unit direction in the ground plane (zero vertical component)."""
    angle = rng.uniform(0.0, 2.0 * math.pi)
    return np.array([math.cos(angle), 0.0, math.sin(angle)])


def _first_clear_step(
    half: np.ndarray,
    direction: np.ndarray,
    priors: list[Aabb],
    step: float,
    max_steps: int,
) -> int:
    """Smallest k >= 0 such that a box of world half extents ``half`` centered
    at k*step*direction overlaps no prior box.

    Equivalent to stepping k = 0, 1, 2, ... and testing each position; for
    every prior the overlapping k form one contiguous integer interval, so the
    answer is the first gap in their union.
    """
    intervals = []
    for prior in priors:
        lo_k = -math.inf  # open interval (lo_k, hi_k) of real-valued k
        hi_k = math.inf
        for a in range(3):
            lo_b = prior.lo[a] - half[a]
            hi_b = prior.hi[a] + half[a]
            d = direction[a] * step
            if d == 0.0:
                if not (lo_b < 0.0 < hi_b):
                    lo_k, hi_k = math.inf, -math.inf  # never overlaps
                    break
                continue
            k0, k1 = lo_b / d, hi_b / d
            if k0 > k1:
                k0, k1 = k1, k0
            lo_k = max(lo_k, k0)
            hi_k = min(hi_k, k1)
        if lo_k >= hi_k:
            continue
        # integers strictly inside (lo_k, hi_k)
        k_min = math.floor(lo_k) + 1
        k_max = math.ceil(hi_k) - 1
        if k_max >= 0 and k_max >= k_min:
            intervals.append((max(k_min, 0), k_max))
    if not intervals:
        return 0
    intervals.sort()
    k = 0
    for k_min, k_max in intervals:
        if k < k_min:
            break
        k = max(k, k_max + 1)
    return k


def compose_scene(
    catalog: list[ObjectTemplate],
    seed: int,
    count: int | None = None,
    category_weights: dict[str, float] | None = None,
    push_step: float = PUSH_STEP,
    max_push_steps: int = MAX_PUSH_STEPS,
) -> SceneComposite:
    """Deterministically compose a collision-free scene from ``seed``.

    The first object is centered at the origin; each later object starts at
    the origin and is pushed along a random ground-plane direction in fixed
    increments until its AABB clears all previously placed AABBs.

    Args:
        catalog: available templates; categories are sampled according to
            ``category_weights`` (uniform over the categories present when
            None), then a template of that category uniformly.
        seed: RNG seed; the result is a pure function of (catalog, seed).
        count: force the object count instead of drawing from [3, 6].
        category_weights: optional per-category sampling weights.

    Raises:
        PlacementError: if an object exceeds ``max_push_steps`` increments.
    """
    validate_catalog(catalog)
    rng = np.random.default_rng(seed)

    by_category: dict[str, list[ObjectTemplate]] = {}
    for tpl in catalog:
        by_category.setdefault(tpl.category, []).append(tpl)
    cats = sorted(by_category)
    if category_weights is None:
        weights = np.full(len(cats), 1.0 / len(cats))
    else:
        weights = np.array([max(float(category_weights.get(c, 0.0)), 0.0) for c in cats])
        if weights.sum() <= 0:
            raise ValueError("category_weights assign no mass to catalog categories")
        weights = weights / weights.sum()

    if count is None:
        n = int(rng.integers(MIN_OBJECTS, MAX_OBJECTS + 1))
    else:
        if count < 1:
            raise ValueError("count must be >= 1")
        n = count

    objects: list[PlacedObject] = []
    prior_boxes: list[Aabb] = []
    for i in range(n):
        cat = cats[rng.choice(len(cats), p=weights)]
        tpl = by_category[cat][rng.integers(len(by_category[cat]))]
        scale = float(rng.uniform(0.95, 1.05))
        yaw = float(rng.uniform(0.0, 2.0 * math.pi))
        if i == 0:
            translation = np.zeros(3)
        else:
            direction = sample_placement_direction(rng)
            half = rotated_half_extents(tpl.half_extents, scale, yaw)
            k = _first_clear_step(half, direction, prior_boxes, push_step, max_push_steps)
            if k > max_push_steps:
                raise PlacementError(i, max_push_steps)
            translation = k * push_step * direction
        obj = PlacedObject(
            instance_id=i + 1,
            template_id=tpl.template_id,
            category=cat,
            scale=scale,
            yaw=yaw,
            translation=translation,
            half_extents=tpl.half_extents,
            color=tpl.base_color,
        )
        if any(aabb_intersects(obj.aabb, b) for b in prior_boxes):
            raise PlacementError(i, max_push_steps)  # float-boundary pathology
        objects.append(obj)
        prior_boxes.append(obj.aabb)

    union = objects[0].aabb
    for obj in objects[1:]:
        union = union.union(obj.aabb)
    factor = 1.0 / float(np.max(union.sizes))
    return SceneComposite(objects=tuple(objects), seed=int(seed), normalization_factor=factor)
