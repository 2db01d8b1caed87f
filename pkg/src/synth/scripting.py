"""
Scripted hand-washing trials - pose trajectories visiting activity regions
"""

from typing import Dict, List, Optional, Sequence, Union

import itertools
import logging
import numpy as np

from ..errors import ScriptError
from ..imaging.depth import back_project
from ..models.activity import Action, Activity, ActivityRegion, StepOrdering
from ..models.imaging import CameraIntrinsics, WorldPoint
from ..models.trial import FrameScript, SceneScript, SynthConfig, Vec3
from ..tracking.activity import track_steps

logger = logging.getLogger(__name__)

# Standing pose in front of the sink, meters in camera coordinates
HEAD = np.array([0.0, 0.32, 1.65])
TORSO = np.array([0.0, 0.36, 1.95])
LEFT_SHOULDER = np.array([-0.20, 0.30, 1.85])
RIGHT_SHOULDER = np.array([0.20, 0.30, 1.85])
LEFT_REST = np.array([-0.32, 0.20, 2.15])
RIGHT_REST = np.array([0.32, 0.20, 2.15])

WALK_OFFSET = np.array([0.0, 0.35, 0.0])
TURN_ANGLE = np.pi / 2

TEMPLATES: Dict[str, List[str]] = {
    "canonical": ["walk", "tap", "soap", "water", "tap", "towel", "turn", "walk"],
    "no_soap": ["walk", "tap", "water", "tap", "towel", "turn", "walk"],
    "no_towel": ["walk", "tap", "soap", "water", "tap", "turn", "walk"],
    "no_rinse": ["walk", "tap", "soap", "tap", "towel", "turn", "walk"],
}

_VISIT_ACTION = {
    Activity.SOAP: Action.WASH,
    Activity.TAP: Action.WASH,
    Activity.WATER: Action.WASH,
    Activity.SINK: Action.WASH,
    Activity.TOWEL: Action.TOWEL,
}


def template_names() -> List[str]:
    return sorted(TEMPLATES) + ["random"]


def random_template(rng_seed: int) -> List[str]:
    """Canonical visit order with random omissions and an optional sink visit"""
    rng = np.random.default_rng(rng_seed)
    tokens = ["walk", "tap"]
    for activity in ("soap", "water"):
        if rng.random() >= 0.25:
            tokens.append(activity)
    if rng.random() < 0.3:
        tokens.append("sink")
    for activity in ("tap", "towel"):
        if rng.random() >= 0.25:
            tokens.append(activity)
    return tokens + ["turn", "walk"]


def resolve_template(template: Union[str, Sequence[str]], rng_seed: int) -> List[str]:
    if isinstance(template, str):
        if "," in template:
            return [token.strip() for token in template.split(",") if token.strip()]
        if template == "random":
            return random_template(rng_seed)
        if template not in TEMPLATES:
            raise ScriptError(f"Unknown template '{template}', expected one of {template_names()}")
        return list(TEMPLATES[template])
    return list(template)


def _parse_token(token: str) -> Union[Action, Activity]:
    if token in (a.value for a in Activity) and token != Activity.AWAY.value:
        return Activity(token)
    if token in (a.value for a in Action):
        return Action(token)
    raise ScriptError(f"Unknown template token '{token}'")


def check_reachable(
    regions: Sequence[ActivityRegion],
    k: CameraIntrinsics,
    width: int,
    height: int,
) -> None:
    """Raise unless every region's bounding box lies in front of the camera and inside the image"""
    for region in regions:
        center, radii = np.asarray(region.center), np.asarray(region.radii)
        if center[2] - radii[2] <= 0:
            raise ScriptError(f"Region '{region.activity.value}' at {region.center} reaches behind the camera")
        for signs in itertools.product((-1.0, 1.0), repeat=3):
            x, y = back_project(WorldPoint(*(center + np.asarray(signs) * radii)), k)
            if not (0 <= x <= width - 1 and 0 <= y <= height - 1):
                raise ScriptError(
                    f"Region '{region.activity.value}' at {region.center} is outside the camera frustum"
                )


def _rotate(point: np.ndarray, pivot: np.ndarray, angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    dx, dy = point[0] - pivot[0], point[1] - pivot[1]
    return np.array([pivot[0] + c * dx - s * dy, pivot[1] + s * dx + c * dy, point[2]])


def _vec(point: Optional[np.ndarray]) -> Optional[Vec3]:
    return None if point is None else (float(point[0]), float(point[1]), float(point[2]))


class _Scripter:
    """Accumulates frames while the body moves through a template"""

    def __init__(self, regions: Sequence[ActivityRegion], config: SynthConfig, rng: np.random.Generator):
        self.regions = {region.activity: region for region in regions}
        self.config = config
        self.rng = rng
        self.frames: List[FrameScript] = []
        self.angle = 0.0

    def _emit(
        self,
        action: Action,
        left: np.ndarray,
        right: np.ndarray,
        offset: Optional[np.ndarray] = None,
        left_activity: Activity = Activity.AWAY,
        right_activity: Activity = Activity.AWAY,
    ) -> None:
        offset = np.zeros(3) if offset is None else offset
        angle = self.angle
        pivot = HEAD + offset

        def place(p: np.ndarray) -> np.ndarray:
            return _rotate(p + offset, pivot, angle)

        self.frames.append(
            FrameScript(
                head=_vec(pivot),
                torso=_vec(place(TORSO)),
                left_shoulder=_vec(place(LEFT_SHOULDER)),
                right_shoulder=_vec(place(RIGHT_SHOULDER)),
                left_hand=_vec(place(left)),
                right_hand=_vec(place(right)),
                floor_depth=self.config.floor_depth,
                action=action,
                left_activity=left_activity,
                right_activity=right_activity,
            )
        )

    def walk(self, inbound: bool) -> None:
        n = self.config.walk_frames
        for i in range(n):
            fraction = (n - i) / n if inbound else (i + 1) / n
            self._emit(Action.WALK, LEFT_REST, RIGHT_REST, offset=WALK_OFFSET * fraction)

    def turn(self) -> None:
        n = self.config.turn_frames
        for i in range(n):
            self.angle = TURN_ANGLE * (i + 1) / n
            self._emit(Action.TURN, LEFT_REST, RIGHT_REST)

    def rest(self, frames: int = 1) -> None:
        for _ in range(frames):
            self._emit(Action.WASH, LEFT_REST, RIGHT_REST)

    def _inside(self, region: ActivityRegion) -> np.ndarray:
        jitter = self.rng.uniform(-0.3, 0.3, size=3) * np.asarray(region.radii)
        return np.asarray(region.center) + jitter

    def visit(self, activity: Activity) -> None:
        region = self.regions.get(activity)
        if region is None:
            raise ScriptError(f"No region configured for activity '{activity.value}'")
        self.angle = 0.0
        use_left = region.center[0] < 0
        rest = LEFT_REST if use_left else RIGHT_REST
        action = _VISIT_ACTION[activity]
        target = np.asarray(region.center)

        def pose(hand: np.ndarray, engaged: Activity) -> None:
            if use_left:
                self._emit(action, hand, RIGHT_REST, left_activity=engaged)
            else:
                self._emit(action, LEFT_REST, hand, right_activity=engaged)

        steps = self.config.transit_frames + 1
        for i in range(1, steps):
            pose(rest + (target - rest) * i / steps, Activity.AWAY)
        low, high = self.config.dwell_frames
        for _ in range(int(self.rng.integers(low, high + 1))):
            pose(self._inside(region), activity)
        for i in range(1, steps):
            pose(target + (rest - target) * i / steps, Activity.AWAY)
        self.rest()


def script_trial(
    template: Union[str, Sequence[str]],
    rng_seed: int,
    regions: Sequence[ActivityRegion],
    config: Optional[SynthConfig] = None,
    ordering: Optional[StepOrdering] = None,
    base_intrinsics: Optional[CameraIntrinsics] = None,
) -> SceneScript:
    """
    Script a trial from a named template or a token sequence

    Args:
        template: Template name or tokens drawn from actions and activities
        rng_seed: Seed for dwell lengths and in-region jitter
        regions: Activity spheroids the hands visit
        config: Synthetic scene parameters
        ordering: Step precedence used to derive the intended step flags
        base_intrinsics: Full-resolution intrinsics the trial will be rendered with

    Returns:
        SceneScript whose step flags follow from replaying its visits
    """
    config = config or SynthConfig()
    check_reachable(regions, config.intrinsics(base_intrinsics), config.width, config.height)
    tokens = resolve_template(template, rng_seed)
    parsed = [_parse_token(token) for token in tokens]
    scripter = _Scripter(regions, config, np.random.default_rng(rng_seed))
    activations: List[Activity] = []
    walked_in = False
    for item in parsed:
        if item is Action.WALK:
            scripter.walk(inbound=not walked_in)
            walked_in = True
        elif item is Action.TURN:
            scripter.turn()
        elif item is Action.WASH:
            scripter.rest(2)
        elif isinstance(item, Activity):
            scripter.visit(item)
            activations.append(item)
        else:
            raise ScriptError(f"Template token '{item.value}' cannot be scripted")
    if not scripter.frames:
        raise ScriptError("Template produced no frames")
    flags = track_steps(activations, ordering)
    logger.debug(f"Scripted {len(scripter.frames)} frames for template {tokens}")
    return SceneScript(
        template=tokens,
        frames=scripter.frames,
        step_flags=flags,
        intended_activations=activations,
    )
