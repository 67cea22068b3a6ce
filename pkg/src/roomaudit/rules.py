"""Issue-specification rules: JSON DSL parsing, validation, serialization,
and the builtin rule pack of accessibility/safety checks.

The file format is a two-level JSON object: top-level key is an object name
(optionally suffixed, e.g. "Door-Opening"), second-level key is a measurement
name, and the body carries Community / Dependency / Dimension / Existence /
Description. All dimension values are inches.
"""
from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass

INCHES_PER_METER = 39.3701


class Community(enum.Enum):
    CHILDREN = "Children"
    OLDER_ADULTS = "Older Adults"
    BLIND_LOW_VISION = "Blind or Low Vision"
    WHEELCHAIR_USER = "Wheelchair User"


ALL_COMMUNITIES = frozenset(Community)

_COMMUNITY_ALIASES = {
    "children": Community.CHILDREN,
    "child": Community.CHILDREN,
    "olderadults": Community.OLDER_ADULTS,
    "olderadult": Community.OLDER_ADULTS,
    "blindorlowvision": Community.BLIND_LOW_VISION,
    "blindlowvision": Community.BLIND_LOW_VISION,
    "blv": Community.BLIND_LOW_VISION,
    "wheelchairuser": Community.WHEELCHAIR_USER,
    "wheelchairusers": Community.WHEELCHAIR_USER,
}


def parse_community(text: str) -> Community:
    key = re.sub(r"[\s\-_/]+", "", text).lower()
    try:
        return _COMMUNITY_ALIASES[key]
    except KeyError:
        raise RuleSpecError(f"unknown community: {text!r}") from None


class Channel(enum.Enum):
    PARAMETRIC = "parametric"        # boxes from the captured room model
    FRAME_DETECTION = "frame_detection"  # 2D detections localized by raycast
    STRUCTURAL = "structural"        # walls, portals, floors


class ObjectClass(enum.Enum):
    CABINET = "cabinet"
    CHAIR = "chair"
    COUNTER = "counter"
    DOOR = "door"
    DOOR_HANDLE = "door handle"
    ELECTRIC_SOCKET = "electric socket"
    GRAB_BAR = "grab bar"
    KNIVES = "knives"
    KNOB = "knob"
    LIGHT_SWITCH = "light switch"
    MEDICATION = "medication"
    RUG = "rug"
    SINK = "sink"
    SCISSORS = "scissors"
    SMOKE_ALARM = "smoke alarm"
    SOFA = "sofa"
    TABLE = "table"
    TOILET = "toilet"
    WALL = "wall"
    WINDOW = "window"
    OPENING = "opening"
    FLOOR = "floor"
    BED = "bed"
    BATHTUB = "bathtub"
    DISHWASHER = "dishwasher"
    FIREPLACE = "fireplace"
    OVEN = "oven"
    REFRIGERATOR = "refrigerator"
    STAIRS = "stairs"
    STORAGE = "storage"
    STOVE = "stove"
    TELEVISION = "television"
    WASHER_DRYER = "washer-dryer"

    @property
    def display_name(self) -> str:
        return " ".join(w.capitalize() for w in re.split(r"[\s\-]", self.value)) \
            .replace("Washer Dryer", "Washer-Dryer")

    @property
    def channel(self) -> Channel:
        return CLASS_CHANNELS[self]


# The nine RGB-detected classes ride the frame-detection channel; the sixteen
# room-model classes (plus cabinet and counter, which also carry real boxes)
# are parametric; doors/windows/openings/walls/floors are structural.
CLASS_CHANNELS: dict[ObjectClass, Channel] = {
    ObjectClass.DOOR_HANDLE: Channel.FRAME_DETECTION,
    ObjectClass.ELECTRIC_SOCKET: Channel.FRAME_DETECTION,
    ObjectClass.LIGHT_SWITCH: Channel.FRAME_DETECTION,
    ObjectClass.GRAB_BAR: Channel.FRAME_DETECTION,
    ObjectClass.SCISSORS: Channel.FRAME_DETECTION,
    ObjectClass.KNIVES: Channel.FRAME_DETECTION,
    ObjectClass.MEDICATION: Channel.FRAME_DETECTION,
    ObjectClass.RUG: Channel.FRAME_DETECTION,
    ObjectClass.SMOKE_ALARM: Channel.FRAME_DETECTION,
    ObjectClass.KNOB: Channel.FRAME_DETECTION,
    ObjectClass.WALL: Channel.STRUCTURAL,
    ObjectClass.WINDOW: Channel.STRUCTURAL,
    ObjectClass.OPENING: Channel.STRUCTURAL,
    ObjectClass.DOOR: Channel.STRUCTURAL,
    ObjectClass.FLOOR: Channel.STRUCTURAL,
}
for _cls in ObjectClass:
    CLASS_CHANNELS.setdefault(_cls, Channel.PARAMETRIC)

_CLASS_TOKENS: list[tuple[tuple[str, ...], ObjectClass]] = sorted(
    ((tuple(re.split(r"[\s\-]+", c.value)), c) for c in ObjectClass),
    key=lambda item: -len(item[0]),
)


def parse_object_class(text: str) -> ObjectClass:
    """Case-insensitive class lookup; spaces/hyphens/underscores/slashes all
    separate tokens."""
    tokens = tuple(t for t in re.split(r"[\s\-_/]+", text.strip().lower()) if t)
    for class_tokens, cls in _CLASS_TOKENS:
        if tokens == class_tokens:
            return cls
    raise RuleSpecError(f"unknown object class: {text!r}")


def parse_object_name(text: str) -> tuple[ObjectClass, str]:
    """Resolve a top-level key ("Door-Opening") to a class plus suffix.

    Longest token-prefix match wins, so "Door Handle-Kitchen" resolves to the
    door handle class rather than door.
    """
    tokens = tuple(t for t in re.split(r"[\s\-_/]+", text.strip().lower()) if t)
    best: ObjectClass | None = None
    best_len = 0
    for class_tokens, cls in _CLASS_TOKENS:
        n = len(class_tokens)
        if len(tokens) >= n and tokens[:n] == class_tokens and n > best_len:
            best, best_len = cls, n
    if best is None:
        raise RuleSpecError(f"unknown object class in name: {text!r}")
    suffix = " ".join(tokens[best_len:])
    return best, suffix


class Measurement(enum.Enum):
    HEIGHT = "Height"
    RADIUS = "Radius"
    DEPTH = "Depth"
    PRESENCE = "Presence"
    ABSENCE = "Absence"


class ComparisonOp(enum.Enum):
    LT = "<"
    LE = "<="
    EQ = "=="
    GE = ">="
    GT = ">"
    BETWEEN = "between"


class Existence(enum.Enum):
    UNSET = "unset"
    MUST_NOT_EXIST = "must_not_exist"  # JSON false: the object should not be there
    MUST_EXIST = "must_exist"          # JSON true: the object is required


class IssueCategory(enum.Enum):
    DIMENSION = "dimension"
    POSITION = "position"
    EXISTENCE = "existence"


class RuleSource(enum.Enum):
    BUILT_IN = "built_in"
    USER_FILE = "user_file"


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


class RuleSpecError(ValueError):
    """Raised for malformed or semantically invalid rule-spec documents."""


@dataclass(frozen=True)
class DimensionConstraint:
    op: ComparisonOp
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    rule_id: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity.value}: [{self.rule_id}] {self.message}"


@dataclass(frozen=True)
class IssueRule:
    rule_id: str
    object_class: ObjectClass
    measurement: Measurement
    communities: frozenset[Community]
    dependencies: frozenset[ObjectClass] = frozenset()
    dimension: DimensionConstraint | None = None
    existence: Existence = Existence.UNSET
    description: str = ""
    category: IssueCategory | None = None

    def __post_init__(self):
        object.__setattr__(self, "communities", frozenset(self.communities))
        object.__setattr__(self, "dependencies", frozenset(self.dependencies))
        if self.category is None:
            object.__setattr__(self, "category", default_category(self))

    @property
    def enabled(self) -> bool:
        """A rule fires only when it has a constraint or an existence flag."""
        return self.dimension is not None or self.existence is not Existence.UNSET


def default_category(rule: IssueRule) -> IssueCategory:
    if rule.existence is not Existence.UNSET:
        return IssueCategory.EXISTENCE
    if rule.object_class.channel is Channel.FRAME_DETECTION:
        return IssueCategory.POSITION
    return IssueCategory.DIMENSION


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[IssueRule, ...]
    source: RuleSource = RuleSource.USER_FILE

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))

    def __iter__(self):
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def by_id(self, rule_id: str) -> IssueRule:
        for r in self.rules:
            if r.rule_id == rule_id:
                return r
        raise KeyError(rule_id)


_EXISTENCE_FROM_JSON = {None: Existence.UNSET, False: Existence.MUST_NOT_EXIST, True: Existence.MUST_EXIST}
_EXISTENCE_TO_JSON = {v: k for k, v in _EXISTENCE_FROM_JSON.items()}
_OP_ALIASES = {op.value: op for op in ComparisonOp}
_OP_ALIASES["Between"] = ComparisonOp.BETWEEN
_OP_ALIASES["BETWEEN"] = ComparisonOp.BETWEEN
_CATEGORY_ALIASES = {c.value: c for c in IssueCategory}
_CATEGORY_ALIASES.update({c.value.capitalize(): c for c in IssueCategory})


def _constraint_arity(op: ComparisonOp) -> int:
    return 2 if op is ComparisonOp.BETWEEN else 1


def _parse_rule_body(object_name: str, object_class: ObjectClass,
                     measurement_key: str, body: object) -> IssueRule:
    if not isinstance(body, dict):
        raise RuleSpecError(f"{object_name}/{measurement_key}: rule body must be a JSON object")
    try:
        raw_measurement = Measurement(measurement_key.strip().capitalize())
    except ValueError:
        raise RuleSpecError(
            f"{object_name}: unknown measurement key {measurement_key!r}") from None

    raw_comm = body.get("Community", [])
    if not isinstance(raw_comm, list):
        raise RuleSpecError(f"{object_name}/{measurement_key}: Community must be a list")
    communities = frozenset(parse_community(c) for c in raw_comm)

    raw_deps = body.get("Dependency", []) or []
    if not isinstance(raw_deps, list):
        raise RuleSpecError(f"{object_name}/{measurement_key}: Dependency must be a list")
    try:
        dependencies = frozenset(parse_object_class(d) for d in raw_deps)
    except RuleSpecError as e:
        raise RuleSpecError(f"{object_name}/{measurement_key}: {e}") from None

    existence_raw = body.get("Existence", None)
    if existence_raw not in _EXISTENCE_FROM_JSON:
        raise RuleSpecError(
            f"{object_name}/{measurement_key}: Existence must be null, true, or false")
    existence = _EXISTENCE_FROM_JSON[existence_raw]

    dim_raw = body.get("Dimension", None)
    constraint: DimensionConstraint | None = None
    if dim_raw is not None:
        if not isinstance(dim_raw, dict):
            raise RuleSpecError(f"{object_name}/{measurement_key}: Dimension must be an object")
        comparison = dim_raw.get("Comparison", None)
        values = dim_raw.get("Value", None)
        if comparison is None and values is None:
            pass  # explicit null constraint, legal alongside an existence flag
        elif comparison is None or values is None:
            raise RuleSpecError(
                f"{object_name}/{measurement_key}: Comparison and Value must both be set or both null")
        else:
            op = _OP_ALIASES.get(str(comparison).strip().lower(), None) \
                or _OP_ALIASES.get(str(comparison).strip(), None)
            if op is None:
                raise RuleSpecError(
                    f"{object_name}/{measurement_key}: unknown comparison operator {comparison!r}")
            if not isinstance(values, list) or not all(isinstance(v, (int, float)) for v in values):
                raise RuleSpecError(
                    f"{object_name}/{measurement_key}: Value must be a list of numbers")
            if len(values) != _constraint_arity(op):
                raise RuleSpecError(
                    f"{object_name}/{measurement_key}: operator {op.value!r} takes "
                    f"{_constraint_arity(op)} value(s), got {len(values)}")
            constraint = DimensionConstraint(op, tuple(values))

    if existence is not Existence.UNSET and constraint is not None:
        raise RuleSpecError(
            f"{object_name}/{measurement_key}: a rule cannot carry both a dimension "
            "constraint and an existence flag")

    enabled_flag = body.get("Enabled", True)
    if enabled_flag not in (True, False):
        raise RuleSpecError(f"{object_name}/{measurement_key}: Enabled must be a boolean")
    if existence is Existence.UNSET and constraint is None and enabled_flag:
        raise RuleSpecError(
            f"{object_name}/{measurement_key}: rule does nothing (no dimension constraint "
            "and no existence flag); set \"Enabled\": false to keep it as a placeholder")

    # Existential rules keep a canonical measurement regardless of the key they
    # were filed under (some files key them under Radius).
    if existence is Existence.MUST_NOT_EXIST:
        measurement = Measurement.PRESENCE
    elif existence is Existence.MUST_EXIST:
        measurement = Measurement.ABSENCE
    else:
        measurement = raw_measurement
        if measurement in (Measurement.PRESENCE, Measurement.ABSENCE):
            raise RuleSpecError(
                f"{object_name}/{measurement_key}: Presence/Absence rules need an Existence flag")

    category = None
    if "Category" in body and body["Category"] is not None:
        cat_key = str(body["Category"]).strip().lower()
        if cat_key not in _CATEGORY_ALIASES:
            raise RuleSpecError(f"{object_name}/{measurement_key}: unknown Category {body['Category']!r}")
        category = _CATEGORY_ALIASES[cat_key]

    description = body.get("Description", "") or ""
    if not isinstance(description, str):
        raise RuleSpecError(f"{object_name}/{measurement_key}: Description must be a string")

    return IssueRule(
        rule_id=f"{object_name}-{measurement.value}",
        object_class=object_class,
        measurement=measurement,
        communities=communities,
        dependencies=dependencies,
        dimension=constraint,
        existence=existence,
        description=description,
        category=category,
    )


def parse_rule_spec(text: str, source: RuleSource = RuleSource.USER_FILE) -> RuleSet:
    """Parse a rule-spec JSON document into a RuleSet.

    Raises RuleSpecError on malformed JSON, unknown object/community names,
    operator arity mismatches, constraints on existential rules, and rules
    that can never fire.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise RuleSpecError(f"malformed JSON: {e}") from None
    if not isinstance(doc, dict):
        raise RuleSpecError("top level must be a JSON object keyed by object name")
    rules: list[IssueRule] = []
    for object_name, measurements in doc.items():
        object_class, _suffix = parse_object_name(object_name)
        if not isinstance(measurements, dict):
            raise RuleSpecError(f"{object_name}: value must be an object keyed by measurement")
        for measurement_key, body in measurements.items():
            rules.append(_parse_rule_body(object_name, object_class, measurement_key, body))
    return RuleSet(tuple(rules), source=source)


def serialize_rule_spec(rs: RuleSet) -> str:
    """Canonical JSON for a RuleSet; parse(serialize(rs)) reproduces rs."""
    doc: dict[str, dict[str, dict]] = {}
    for rule in rs.rules:
        suffix = f"-{rule.measurement.value}"
        object_name = rule.rule_id[: -len(suffix)] if rule.rule_id.endswith(suffix) \
            else rule.object_class.display_name
        body: dict[str, object] = {
            "Community": sorted(c.value for c in rule.communities),
            "Dependency": sorted(d.display_name for d in rule.dependencies),
            "Dimension": {
                "Comparison": rule.dimension.op.value if rule.dimension else None,
                "Value": list(rule.dimension.values) if rule.dimension else None,
            },
            "Existence": _EXISTENCE_TO_JSON[rule.existence],
            "Description": rule.description,
            "Category": rule.category.value if rule.category else None,
        }
        if not rule.enabled:
            body["Enabled"] = False
        doc.setdefault(object_name, {})[rule.measurement.value] = body
    return json.dumps(doc, indent=2)


def validate_rule_set(rs: RuleSet) -> list[Diagnostic]:
    """Structured diagnostics; an empty list means the rule set is valid."""
    out: list[Diagnostic] = []
    seen: set[str] = set()
    for rule in rs.rules:
        if rule.rule_id in seen:
            out.append(Diagnostic(Severity.ERROR, rule.rule_id, "duplicate rule id"))
        seen.add(rule.rule_id)
        if rule.enabled and not rule.communities:
            out.append(Diagnostic(Severity.ERROR, rule.rule_id, "rule has an empty community set"))
        if rule.existence is not Existence.UNSET and rule.object_class in rule.dependencies \
                and rule.existence is Existence.MUST_NOT_EXIST:
            out.append(Diagnostic(Severity.WARNING, rule.rule_id,
                                  "existential rule depends on its own object class"))
        if rule.dimension is not None:
            c = rule.dimension
            if c.op is ComparisonOp.BETWEEN and c.values[0] > c.values[1]:
                out.append(Diagnostic(Severity.ERROR, rule.rule_id,
                                      f"between bounds reversed: {c.values[0]} > {c.values[1]}"))
            if any(v <= 0 for v in c.values):
                out.append(Diagnostic(Severity.ERROR, rule.rule_id,
                                      "dimension values must be positive inches"))
    return out


def filter_by_community(rs: RuleSet, selected: set[Community] | frozenset[Community]) -> RuleSet:
    """Keep rules whose community set intersects the selection.

    Disabled placeholder rules pass through unchanged; they never evaluate,
    and dropping them would make filtering by all communities lossy.
    """
    if not selected:
        raise ValueError("selected communities must be non-empty")
    kept = tuple(r for r in rs.rules if (not r.enabled) or (r.communities & frozenset(selected)))
    return RuleSet(kept, source=rs.source)


def _rule(object_name: str, object_class: ObjectClass, measurement: Measurement,
          communities: set[Community], category: IssueCategory,
          dimension: DimensionConstraint | None = None,
          existence: Existence = Existence.UNSET,
          dependencies: set[ObjectClass] = frozenset(),
          description: str = "") -> IssueRule:
    return IssueRule(
        rule_id=f"{object_name}-{measurement.value}",
        object_class=object_class,
        measurement=measurement,
        communities=frozenset(communities),
        dependencies=frozenset(dependencies),
        dimension=dimension,
        existence=existence,
        description=description,
        category=category,
    )


_REACHABLE_SURFACES = {ObjectClass.TABLE, ObjectClass.SOFA, ObjectClass.COUNTER,
                       ObjectClass.FLOOR, ObjectClass.BED, ObjectClass.CHAIR}
_WU = {Community.WHEELCHAIR_USER}
_ADULTS = {Community.OLDER_ADULTS, Community.BLIND_LOW_VISION, Community.WHEELCHAIR_USER}
_CH = {Community.CHILDREN}


def builtin_rule_pack() -> RuleSet:
    """The shipped pack: 19 rules covering 18 checks (the grab-bar check is
    split into a children range and an adult range).

    Sofa height and chair depth ship disabled: the source material defines the
    checks but prints no thresholds. Note the sink rule encodes rim height
    <= 17 in verbatim from its source even though common guidance is a maximum
    of 34 in; see README.
    """
    B, GE, LE = ComparisonOp.BETWEEN, ComparisonOp.GE, ComparisonOp.LE
    rules = (
        _rule("Table", ObjectClass.TABLE, Measurement.HEIGHT, _WU, IssueCategory.DIMENSION,
              DimensionConstraint(B, (28, 34)),
              description="Table surface should be 28 to 34 inches high for seated reach."),
        _rule("Counter", ObjectClass.COUNTER, Measurement.HEIGHT, _WU, IssueCategory.DIMENSION,
              DimensionConstraint(B, (28, 34)),
              description="Counter surface should be 28 to 34 inches high for seated use."),
        _rule("Toilet", ObjectClass.TOILET, Measurement.HEIGHT, _WU, IssueCategory.DIMENSION,
              DimensionConstraint(B, (17, 19)),
              description="Toilet seat should be 17 to 19 inches above the floor."),
        _rule("Sofa", ObjectClass.SOFA, Measurement.HEIGHT, set(), IssueCategory.DIMENSION,
              description="Sofa seat height check; disabled, no threshold configured."),
        _rule("Sink", ObjectClass.SINK, Measurement.HEIGHT, _WU, IssueCategory.DIMENSION,
              DimensionConstraint(LE, (17,)),
              description="Sink rim should be no higher than 17 inches."),
        _rule("Chair", ObjectClass.CHAIR, Measurement.DEPTH, set(), IssueCategory.DIMENSION,
              description="Chair seat depth check; disabled, no threshold configured."),
        _rule("Door", ObjectClass.DOOR, Measurement.RADIUS, _WU, IssueCategory.DIMENSION,
              DimensionConstraint(GE, (32,)), dependencies={ObjectClass.DOOR},
              description="Doorways should provide at least 32 inches of clear width."),
        _rule("Cabinet", ObjectClass.CABINET, Measurement.HEIGHT, _WU, IssueCategory.POSITION,
              DimensionConstraint(LE, (27,)),
              description="Cabinets should be mounted no higher than 27 inches for seated reach."),
        _rule("Knob", ObjectClass.KNOB, Measurement.HEIGHT, _WU, IssueCategory.POSITION,
              DimensionConstraint(B, (34, 48)),
              description="Knobs should sit between 34 and 48 inches above the floor."),
        _rule("Door Handle", ObjectClass.DOOR_HANDLE, Measurement.HEIGHT, _WU, IssueCategory.POSITION,
              DimensionConstraint(B, (34, 48)),
              description="Door handles should sit between 34 and 48 inches above the floor."),
        _rule("Light Switch", ObjectClass.LIGHT_SWITCH, Measurement.HEIGHT, _WU, IssueCategory.POSITION,
              DimensionConstraint(B, (15, 48)),
              description="Light switches should sit between 15 and 48 inches above the floor."),
        _rule("Grab Bar-Children", ObjectClass.GRAB_BAR, Measurement.HEIGHT, _CH, IssueCategory.POSITION,
              DimensionConstraint(B, (18, 27)),
              description="Grab bars for children should be 18 to 27 inches above the floor."),
        _rule("Grab Bar-Adults", ObjectClass.GRAB_BAR, Measurement.HEIGHT, _ADULTS, IssueCategory.POSITION,
              DimensionConstraint(B, (33, 36)),
              description="Grab bars should be 33 to 36 inches above the floor."),
        _rule("Electric Socket", ObjectClass.ELECTRIC_SOCKET, Measurement.HEIGHT,
              set(ALL_COMMUNITIES), IssueCategory.POSITION,
              DimensionConstraint(B, (15, 48)),
              description="Electrical outlets should sit between 15 and 48 inches above the floor."),
        _rule("Rug", ObjectClass.RUG, Measurement.PRESENCE, set(ALL_COMMUNITIES),
              IssueCategory.EXISTENCE, existence=Existence.MUST_NOT_EXIST,
              dependencies={ObjectClass.FLOOR},
              description="Throw rugs on the floor are a trip hazard and should be removed."),
        _rule("Scissors", ObjectClass.SCISSORS, Measurement.PRESENCE, _CH,
              IssueCategory.EXISTENCE, existence=Existence.MUST_NOT_EXIST,
              dependencies=_REACHABLE_SURFACES,
              description="Scissors should not be left on reachable surfaces."),
        _rule("Knives", ObjectClass.KNIVES, Measurement.PRESENCE, _CH,
              IssueCategory.EXISTENCE, existence=Existence.MUST_NOT_EXIST,
              dependencies=_REACHABLE_SURFACES,
              description="Knives should not be left on reachable surfaces."),
        _rule("Medication", ObjectClass.MEDICATION, Measurement.PRESENCE, _CH,
              IssueCategory.EXISTENCE, existence=Existence.MUST_NOT_EXIST,
              dependencies=_REACHABLE_SURFACES,
              description="Medication should not be left on reachable surfaces."),
        _rule("Smoke Alarm", ObjectClass.SMOKE_ALARM, Measurement.ABSENCE,
              set(ALL_COMMUNITIES), IssueCategory.EXISTENCE, existence=Existence.MUST_EXIST,
              description="Every room should have a smoke alarm."),
    )
    return RuleSet(rules, source=RuleSource.BUILT_IN)
