"""SR content items: the node types of a structured report tree.

Each item is a name/value pair; the value shape is fixed by the item's
value type (CODE, NUM, SCOORD, ...). Items form trees through `children`;
every non-root item carries exactly one relationship to its parent, and
only CONTAINER items may hold children related by CONTAINS. Trees are
treated as immutable once built; `with_relationship` returns modified
copies rather than mutating.
"""
from __future__ import annotations

import copy
import enum
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from ..coding import CodedConcept, concept_from_items, concept_to_items
from ..dataset import DataSet
from ..errors import InvalidGraphicError, InvalidUnitError
from ..uid import is_valid_uid, new_uid
from ..valuerep import format_ds, is_valid_ds


class ValueType(str, enum.Enum):
    CONTAINER = "CONTAINER"
    CODE = "CODE"
    NUM = "NUM"
    TEXT = "TEXT"
    UIDREF = "UIDREF"
    PNAME = "PNAME"
    DATETIME = "DATETIME"
    IMAGE = "IMAGE"
    COMPOSITE = "COMPOSITE"
    SCOORD = "SCOORD"
    SCOORD3D = "SCOORD3D"


class RelationshipType(str, enum.Enum):
    CONTAINS = "CONTAINS"
    HAS_OBS_CONTEXT = "HAS OBS CONTEXT"
    HAS_CONCEPT_MOD = "HAS CONCEPT MOD"
    HAS_ACQ_CONTEXT = "HAS ACQ CONTEXT"
    INFERRED_FROM = "INFERRED FROM"
    SELECTED_FROM = "SELECTED FROM"
    HAS_PROPERTIES = "HAS PROPERTIES"


class GraphicType2D(str, enum.Enum):
    POINT = "POINT"
    MULTIPOINT = "MULTIPOINT"
    POLYLINE = "POLYLINE"
    CIRCLE = "CIRCLE"
    ELLIPSE = "ELLIPSE"


class GraphicType3D(str, enum.Enum):
    POINT = "POINT"
    MULTIPOINT = "MULTIPOINT"
    POLYLINE = "POLYLINE"
    POLYGON = "POLYGON"
    ELLIPSE = "ELLIPSE"
    ELLIPSOID = "ELLIPSOID"


class ContinuityOfContent(str, enum.Enum):
    SEPARATE = "SEPARATE"
    CONTINUOUS = "CONTINUOUS"


@dataclass(frozen=True)
class TrackingIdentifier:
    """Stable identity for an ROI: a UID plus an optional readable label."""

    uid: str
    identifier: str | None = None

    def __post_init__(self):
        if not is_valid_uid(self.uid):
            raise ValueError(f"not a well-formed tracking UID: {self.uid!r}")

    @classmethod
    def generate(cls, identifier: str | None = None) -> "TrackingIdentifier":
        return cls(uid=new_uid(), identifier=identifier)


@dataclass(frozen=True)
class AlgorithmIdentification:
    """Name and version of the algorithm that produced an annotation."""

    name: str
    version: str
    parameters: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.name or not self.version:
            raise ValueError("algorithm name and version must be non-empty")
        object.__setattr__(self, "parameters", tuple(self.parameters))


class ContentItem:
    """Abstract base for all content item variants."""

    value_type: ValueType  # set on subclasses

    __slots__ = ("name", "relationship", "children")

    def __init__(
        self,
        name: CodedConcept | None,
        relationship: RelationshipType | str | None = None,
        children: Iterable["ContentItem"] = (),
    ):
        self.name = name
        self.relationship = (
            None if relationship is None else RelationshipType(relationship)
        )
        self.children = tuple(children)
        self._validate_children()

    def _validate_children(self) -> None:
        for child in self.children:
            if child.relationship is None:
                raise ValueError("every child item needs a relationship")
            if (
                child.relationship is RelationshipType.CONTAINS
                and self.value_type is not ValueType.CONTAINER
            ):
                raise ValueError(
                    "only CONTAINER items may hold CONTAINS children"
                )

    # payload fields participating in equality/repr, defined per subclass
    def _payload(self) -> tuple:
        return ()

    def with_relationship(self, relationship) -> "ContentItem":
        clone = copy.copy(self)
        clone.relationship = RelationshipType(relationship)
        return clone

    def with_children(self, children: Iterable["ContentItem"]) -> "ContentItem":
        clone = copy.copy(self)
        clone.children = tuple(children)
        clone._validate_children()
        return clone

    def iter(self) -> Iterator["ContentItem"]:
        """Depth-first, document order, self first."""
        yield self
        for child in self.children:
            yield from child.iter()

    def find(
        self,
        name: CodedConcept | None = None,
        value_type: ValueType | str | None = None,
        relationship: RelationshipType | str | None = None,
        recursive: bool = True,
    ) -> list["ContentItem"]:
        """All items matching every supplied filter, in document order."""
        if value_type is not None:
            value_type = ValueType(value_type)
        if relationship is not None:
            relationship = RelationshipType(relationship)
        candidates = self.iter() if recursive else iter((self, *self.children))
        out = []
        for item in candidates:
            if name is not None and (item.name is None or item.name != name):
                continue
            if value_type is not None and item.value_type is not value_type:
                continue
            if relationship is not None and item.relationship is not relationship:
                continue
            out.append(item)
        return out

    def __eq__(self, other) -> bool:
        if type(self) is not type(other):
            return NotImplemented
        if (self.name, self.relationship) != (other.name, other.relationship):
            return False
        mine, theirs = self._payload(), other._payload()
        if len(mine) != len(theirs):
            return False
        for a, b in zip(mine, theirs):
            if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
                if not np.array_equal(a, b):
                    return False
            elif a != b:
                return False
        return self.children == other.children

    def __hash__(self):
        raise TypeError("content items are not hashable")

    def __repr__(self) -> str:
        label = self.name.meaning if self.name else "<unnamed>"
        return f"{type(self).__name__}({label!r})"


class ContainerItem(ContentItem):
    value_type = ValueType.CONTAINER
    __slots__ = ("continuity", "template_id")

    def __init__(
        self,
        name: CodedConcept,
        children: Iterable[ContentItem] = (),
        continuity: ContinuityOfContent = ContinuityOfContent.SEPARATE,
        relationship=None,
        template_id: str | None = None,
    ):
        super().__init__(name, relationship, children)
        self.continuity = ContinuityOfContent(continuity)
        self.template_id = template_id

    def _payload(self):
        return (self.continuity, self.template_id)


class CodeItem(ContentItem):
    value_type = ValueType.CODE
    __slots__ = ("value",)

    def __init__(self, name, value: CodedConcept, relationship=None, children=()):
        super().__init__(name, relationship, children)
        if not isinstance(value, CodedConcept):
            raise TypeError("CODE items are valued by a CodedConcept")
        self.value = value

    def _payload(self):
        return (self.value, self.value.meaning)


class NumItem(ContentItem):
    """Measurement: decimal value plus a UCUM unit.

    The numeric value is carried as a decimal string (max 16 characters) so
    that encoding is drift-free; floats are formatted on construction.
    """

    value_type = ValueType.NUM
    __slots__ = ("value", "unit", "qualifier")

    def __init__(self, name, value, unit: CodedConcept,
                 qualifier: CodedConcept | None = None,
                 relationship=None, children=()):
        super().__init__(name, relationship, children)
        if isinstance(value, str):
            if not is_valid_ds(value):
                raise ValueError(f"not a valid decimal string: {value!r}")
            self.value = value
        else:
            self.value = format_ds(value)
        if not isinstance(unit, CodedConcept) or unit.scheme != "UCUM":
            raise InvalidUnitError(
                f"measurement units must be UCUM-coded, got {unit!r}"
            )
        self.unit = unit
        self.qualifier = qualifier

    @property
    def numeric(self) -> float:
        return float(self.value)

    def _payload(self):
        return (self.value, self.unit, self.qualifier)


class _StringItem(ContentItem):
    __slots__ = ("value",)

    def __init__(self, name, value: str, relationship=None, children=()):
        super().__init__(name, relationship, children)
        if not isinstance(value, str):
            raise TypeError(f"{type(self).__name__} is valued by a string")
        self.value = value

    def _payload(self):
        return (self.value,)


class TextItem(_StringItem):
    value_type = ValueType.TEXT
    __slots__ = ()


class UIDRefItem(_StringItem):
    value_type = ValueType.UIDREF
    __slots__ = ()

    def __init__(self, name, value, relationship=None, children=()):
        super().__init__(name, value, relationship, children)
        if not is_valid_uid(self.value):
            raise ValueError(f"not a well-formed UID: {value!r}")


class PNameItem(_StringItem):
    value_type = ValueType.PNAME
    __slots__ = ()


class DateTimeItem(_StringItem):
    value_type = ValueType.DATETIME
    __slots__ = ()


class _ReferenceItem(ContentItem):
    __slots__ = ("sop_class_uid", "sop_instance_uid")

    def __init__(self, name, sop_class_uid: str, sop_instance_uid: str,
                 relationship=None, children=()):
        super().__init__(name, relationship, children)
        if not is_valid_uid(sop_class_uid) or not is_valid_uid(sop_instance_uid):
            raise ValueError("referenced SOP class/instance UIDs must be well-formed")
        self.sop_class_uid = sop_class_uid
        self.sop_instance_uid = sop_instance_uid

    def _payload(self):
        return (self.sop_class_uid, self.sop_instance_uid)


class ImageItem(_ReferenceItem):
    """Reference to an image instance, optionally to a segment or frames."""

    value_type = ValueType.IMAGE
    __slots__ = ("segment_number", "frame_numbers")

    def __init__(self, name, sop_class_uid, sop_instance_uid,
                 segment_number: int | None = None,
                 frame_numbers: Sequence[int] | None = None,
                 relationship=None, children=()):
        super().__init__(name, sop_class_uid, sop_instance_uid, relationship, children)
        self.segment_number = None if segment_number is None else int(segment_number)
        self.frame_numbers = (
            None if frame_numbers is None else tuple(int(f) for f in frame_numbers)
        )

    def _payload(self):
        return (*super()._payload(), self.segment_number, self.frame_numbers)


class CompositeItem(_ReferenceItem):
    value_type = ValueType.COMPOSITE
    __slots__ = ()


def _as_float32_points(points, width: int, what: str) -> np.ndarray:
    array = np.asarray(points, dtype=np.float64)
    if array.ndim == 1:
        if array.size % width:
            raise InvalidGraphicError(
                f"{what}: flat coordinate count must be divisible by {width}"
            )
        array = array.reshape(-1, width)
    if array.ndim != 2 or array.shape[1] != width:
        raise InvalidGraphicError(f"{what}: points must be (N, {width})")
    # storage is IEEE single precision; quantize now so round trips are exact
    array = array.astype(np.float32).astype(np.float64)
    array.setflags(write=False)
    return array


_ARITY_2D = {
    GraphicType2D.POINT: (1, 1),
    GraphicType2D.MULTIPOINT: (1, None),
    GraphicType2D.POLYLINE: (2, None),
    GraphicType2D.CIRCLE: (2, 2),
    GraphicType2D.ELLIPSE: (4, 4),
}
_ARITY_3D = {
    GraphicType3D.POINT: (1, 1),
    GraphicType3D.MULTIPOINT: (1, None),
    GraphicType3D.POLYLINE: (2, None),
    GraphicType3D.POLYGON: (4, None),
    GraphicType3D.ELLIPSE: (4, 4),
    GraphicType3D.ELLIPSOID: (6, 6),
}


def _check_arity(graphic_type, count: int, table) -> None:
    low, high = table[graphic_type]
    if count < low or (high is not None and count > high):
        bound = f"exactly {low}" if low == high else f"at least {low}"
        raise InvalidGraphicError(
            f"{graphic_type.value} requires {bound} point(s), got {count}"
        )


class ScoordItem(ContentItem):
    """2D spatial coordinates in image pixel-matrix units (column, row)."""

    value_type = ValueType.SCOORD
    __slots__ = ("graphic_type", "points")

    def __init__(self, name, graphic_type: GraphicType2D | str, points,
                 relationship=None, children=()):
        super().__init__(name, relationship, children)
        self.graphic_type = GraphicType2D(graphic_type)
        self.points = _as_float32_points(points, 2, self.graphic_type.value)
        _check_arity(self.graphic_type, len(self.points), _ARITY_2D)

    def source_image(self) -> ImageItem | None:
        for child in self.children:
            if (
                isinstance(child, ImageItem)
                and child.relationship is RelationshipType.SELECTED_FROM
            ):
                return child
        return None

    def _payload(self):
        return (self.graphic_type, self.points)


class Scoord3DItem(ContentItem):
    """3D spatial coordinates in frame-of-reference millimeters."""

    value_type = ValueType.SCOORD3D
    __slots__ = ("graphic_type", "points", "frame_of_reference_uid")

    def __init__(self, name, graphic_type: GraphicType3D | str, points,
                 frame_of_reference_uid: str,
                 relationship=None, children=()):
        super().__init__(name, relationship, children)
        self.graphic_type = GraphicType3D(graphic_type)
        self.points = _as_float32_points(points, 3, self.graphic_type.value)
        _check_arity(self.graphic_type, len(self.points), _ARITY_3D)
        if self.graphic_type is GraphicType3D.POLYGON and not np.array_equal(
            self.points[0], self.points[-1]
        ):
            raise InvalidGraphicError("3D POLYGON must be closed (first point == last)")
        if not is_valid_uid(frame_of_reference_uid):
            raise ValueError("SCOORD3D needs a well-formed frame-of-reference UID")
        self.frame_of_reference_uid = frame_of_reference_uid

    def _payload(self):
        return (self.graphic_type, self.points, self.frame_of_reference_uid)


_ITEM_CLASSES: dict[ValueType, type] = {
    ValueType.CONTAINER: ContainerItem,
    ValueType.CODE: CodeItem,
    ValueType.NUM: NumItem,
    ValueType.TEXT: TextItem,
    ValueType.UIDREF: UIDRefItem,
    ValueType.PNAME: PNameItem,
    ValueType.DATETIME: DateTimeItem,
    ValueType.IMAGE: ImageItem,
    ValueType.COMPOSITE: CompositeItem,
    ValueType.SCOORD: ScoordItem,
    ValueType.SCOORD3D: Scoord3DItem,
}


def make_content_item(
    name: CodedConcept | None,
    value_type: ValueType | str,
    payload: dict,
    relationship: RelationshipType | str | None = None,
) -> ContentItem:
    """Generic factory: build the item class matching `value_type` from a
    payload mapping (keys are the class's constructor arguments)."""
    cls = _ITEM_CLASSES[ValueType(value_type)]
    return cls(name, relationship=relationship, **payload)


def find_items(
    root: ContentItem,
    name: CodedConcept | None = None,
    value_type=None,
    relationship=None,
    recursive: bool = True,
) -> list[ContentItem]:
    """Module-level alias of :meth:`ContentItem.find`."""
    return root.find(name, value_type, relationship, recursive)


class ObserverType(str, enum.Enum):
    PERSON = "PERSON"
    DEVICE = "DEVICE"


@dataclass(frozen=True)
class ObserverContext:
    """Who (or what) reported the observations: a person or a device.

    Exactly one identity bundle is populated: `person_name` for PERSON, the
    uid/name/manufacturer/version block for DEVICE.
    """

    observer_type: ObserverType
    person_name: str | None = None
    device_uid: str | None = None
    device_name: str | None = None
    device_manufacturer: str | None = None
    device_version: str | None = None

    def __post_init__(self):
        if self.observer_type is ObserverType.PERSON:
            if not self.person_name or self.device_uid or self.device_name:
                raise ValueError("PERSON context carries the person name only")
        else:
            if self.person_name or not (self.device_uid and self.device_name):
                raise ValueError("DEVICE context needs a device UID and name")

    @classmethod
    def person(cls, name: str) -> "ObserverContext":
        return cls(ObserverType.PERSON, person_name=name)

    @classmethod
    def device(cls, name: str, uid: str | None = None,
               manufacturer: str | None = None,
               version: str | None = None) -> "ObserverContext":
        return cls(
            ObserverType.DEVICE,
            device_uid=uid or new_uid(),
            device_name=name,
            device_manufacturer=manufacturer,
            device_version=version,
        )

    @classmethod
    def for_algorithm(cls, algorithm: AlgorithmIdentification,
                      uid: str | None = None,
                      manufacturer: str | None = None) -> "ObserverContext":
        return cls.device(
            name=algorithm.name,
            uid=uid,
            manufacturer=manufacturer,
            version=algorithm.version,
        )

    def to_items(self) -> list[ContentItem]:
        """Observation-context items, each related by HAS OBS CONTEXT."""
        from ..coding import DCM  # late import keeps module load order simple

        rel = RelationshipType.HAS_OBS_CONTEXT
        if self.observer_type is ObserverType.PERSON:
            return [
                CodeItem(DCM.ObserverType, DCM.Person, relationship=rel),
                PNameItem(DCM.PersonObserverName, self.person_name, relationship=rel),
            ]
        items = [
            CodeItem(DCM.ObserverType, DCM.Device, relationship=rel),
            UIDRefItem(DCM.DeviceObserverUID, self.device_uid, relationship=rel),
            TextItem(DCM.DeviceObserverName, self.device_name, relationship=rel),
        ]
        if self.device_manufacturer:
            items.append(TextItem(
                DCM.DeviceObserverManufacturer, self.device_manufacturer,
                relationship=rel,
            ))
        if self.device_version:
            items.append(TextItem(
                DCM.AlgorithmVersion, self.device_version, relationship=rel,
            ))
        return items


# -- serialization -----------------------------------------------------------


def item_to_dataset(item: ContentItem) -> DataSet:
    """Serialize one content item (and its subtree) to data elements."""
    ds = DataSet()
    if item.relationship is not None:
        ds.put("RelationshipType", item.relationship.value)
    ds.put("ValueType", item.value_type.value)
    if item.name is not None:
        ds.put("ConceptNameCodeSequence", (concept_to_items(item.name),))
    if isinstance(item, ContainerItem):
        ds.put("ContinuityOfContent", item.continuity.value)
        if item.template_id:
            template = DataSet()
            template.put("MappingResource", "DCMR")
            template.put("TemplateIdentifier", item.template_id)
            ds.put("ContentTemplateSequence", (template,))
    elif isinstance(item, CodeItem):
        ds.put("ConceptCodeSequence", (concept_to_items(item.value),))
    elif isinstance(item, NumItem):
        measured = DataSet()
        measured.put("NumericValue", item.value)
        measured.put("MeasurementUnitsCodeSequence", (concept_to_items(item.unit),))
        ds.put("MeasuredValueSequence", (measured,))
        if item.qualifier is not None:
            ds.put(
                "NumericValueQualifierCodeSequence",
                (concept_to_items(item.qualifier),),
            )
    elif isinstance(item, TextItem):
        ds.put("TextValue", item.value)
    elif isinstance(item, UIDRefItem):
        ds.put("UID", item.value)
    elif isinstance(item, PNameItem):
        ds.put("PersonName", item.value)
    elif isinstance(item, DateTimeItem):
        ds.put("DateTime", item.value)
    elif isinstance(item, ImageItem):
        ref = DataSet()
        ref.put("ReferencedSOPClassUID", item.sop_class_uid)
        ref.put("ReferencedSOPInstanceUID", item.sop_instance_uid)
        if item.segment_number is not None:
            ref.put("ReferencedSegmentNumber", item.segment_number)
        if item.frame_numbers is not None:
            ref.put("ReferencedFrameNumber", list(item.frame_numbers))
        ds.put("ReferencedSOPSequence", (ref,))
    elif isinstance(item, CompositeItem):
        ref = DataSet()
        ref.put("ReferencedSOPClassUID", item.sop_class_uid)
        ref.put("ReferencedSOPInstanceUID", item.sop_instance_uid)
        ds.put("ReferencedSOPSequence", (ref,))
    elif isinstance(item, ScoordItem):
        ds.put("GraphicData", [float(v) for v in item.points.ravel()])
        ds.put("GraphicType", item.graphic_type.value)
    elif isinstance(item, Scoord3DItem):
        ds.put("GraphicData", [float(v) for v in item.points.ravel()])
        ds.put("GraphicType", item.graphic_type.value)
        ds.put("ReferencedFrameOfReferenceUID", item.frame_of_reference_uid)
    else:  # pragma: no cover - the class map is closed
        raise TypeError(f"cannot serialize {type(item).__name__}")
    if item.children:
        ds.put("ContentSequence", tuple(item_to_dataset(c) for c in item.children))
    return ds


def item_from_dataset(ds: DataSet) -> ContentItem:
    """Inverse of :func:`item_to_dataset` (tolerant of extra attributes)."""
    value_type = ValueType(ds.value("ValueType"))
    relationship = ds.value("RelationshipType")
    name_items = ds.items_of("ConceptNameCodeSequence")
    name = concept_from_items(name_items[0]) if name_items else None
    children = tuple(item_from_dataset(c) for c in ds.items_of("ContentSequence"))

    if value_type is ValueType.CONTAINER:
        template_items = ds.items_of("ContentTemplateSequence")
        template_id = template_items[0].value("TemplateIdentifier") if template_items else None
        return ContainerItem(
            name,
            children=children,
            continuity=ContinuityOfContent(ds.value("ContinuityOfContent", "SEPARATE")),
            relationship=relationship,
            template_id=template_id,
        )
    if value_type is ValueType.CODE:
        value = concept_from_items(ds.items_of("ConceptCodeSequence")[0])
        return CodeItem(name, value, relationship, children)
    if value_type is ValueType.NUM:
        measured = ds.items_of("MeasuredValueSequence")[0]
        unit = concept_from_items(measured.items_of("MeasurementUnitsCodeSequence")[0])
        qualifier_items = ds.items_of("NumericValueQualifierCodeSequence")
        qualifier = concept_from_items(qualifier_items[0]) if qualifier_items else None
        return NumItem(name, measured.value("NumericValue"), unit, qualifier,
                       relationship, children)
    if value_type is ValueType.TEXT:
        return TextItem(name, ds.value("TextValue", ""), relationship, children)
    if value_type is ValueType.UIDREF:
        return UIDRefItem(name, ds.value("UID"), relationship, children)
    if value_type is ValueType.PNAME:
        return PNameItem(name, ds.value("PersonName", ""), relationship, children)
    if value_type is ValueType.DATETIME:
        return DateTimeItem(name, ds.value("DateTime", ""), relationship, children)
    if value_type in (ValueType.IMAGE, ValueType.COMPOSITE):
        ref = ds.items_of("ReferencedSOPSequence")[0]
        if value_type is ValueType.IMAGE:
            frames = ref.values("ReferencedFrameNumber")
            return ImageItem(
                name,
                ref.value("ReferencedSOPClassUID"),
                ref.value("ReferencedSOPInstanceUID"),
                segment_number=ref.value("ReferencedSegmentNumber"),
                frame_numbers=frames or None,
                relationship=relationship,
                children=children,
            )
        return CompositeItem(
            name,
            ref.value("ReferencedSOPClassUID"),
            ref.value("ReferencedSOPInstanceUID"),
            relationship,
            children,
        )
    if value_type is ValueType.SCOORD:
        return ScoordItem(
            name,
            ds.value("GraphicType"),
            np.asarray(ds.values("GraphicData")),
            relationship,
            children,
        )
    if value_type is ValueType.SCOORD3D:
        return Scoord3DItem(
            name,
            ds.value("GraphicType"),
            np.asarray(ds.values("GraphicData")),
            ds.value("ReferencedFrameOfReferenceUID"),
            relationship,
            children,
        )
    raise TypeError(f"unhandled value type {value_type}")  # pragma: no cover
