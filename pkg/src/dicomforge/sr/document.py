"""Comprehensive SR / Comprehensive 3D SR documents.

Creation copies patient/study/specimen context from the evidence images,
records the evidence hierarchically, and serializes a measurement-report
content tree. Opening exposes the document meta, the evidence references,
the parsed tree, and measurement-group views with filtering.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from ..coding import DCM, SCT, CodedConcept, concept_from_items
from ..dataset import DataSet
from ..derived import (
    check_evidence,
    content_timestamp,
    copy_patient_study,
    evidence_sequence,
)
from ..errors import (
    EvidenceError,
    MissingContentError,
    NoGeometryError,
    TemplateViolationError,
    ValueTypeForbiddenError,
    WrongSopClassError,
)
from ..uid import (
    COMPREHENSIVE_3D_SR_STORAGE,
    COMPREHENSIVE_SR_STORAGE,
    new_uid,
)
from .items import (
    ContainerItem,
    ContentItem,
    ImageItem,
    ScoordItem,
    Scoord3DItem,
    TrackingIdentifier,
    ValueType,
    item_from_dataset,
    item_to_dataset,
)
from .templates import (
    IMAGE_GROUP_TID,
    PLANAR_GROUP_TID,
    VOLUMETRIC_GROUP_TID,
    ImageReference,
)


class SRKind(enum.Enum):
    """Document flavor; COMPREHENSIVE forbids 3D coordinates anywhere."""

    COMPREHENSIVE = COMPREHENSIVE_SR_STORAGE
    COMPREHENSIVE_3D = COMPREHENSIVE_3D_SR_STORAGE

    @property
    def sop_class_uid(self) -> str:
        return self.value

    @classmethod
    def from_sop_class(cls, uid: str) -> "SRKind":
        for kind in cls:
            if kind.value == uid:
                return kind
        raise WrongSopClassError(f"SOP class {uid} is not a supported SR kind")


class CompletionFlag(str, enum.Enum):
    PARTIAL = "PARTIAL"
    COMPLETE = "COMPLETE"


class VerificationFlag(str, enum.Enum):
    UNVERIFIED = "UNVERIFIED"
    VERIFIED = "VERIFIED"


class DocumentReference(NamedTuple):
    """(study, series, sop instance) triple identifying another document."""

    study_instance_uid: str
    series_instance_uid: str
    sop_instance_uid: str


class EvidenceReference(NamedTuple):
    study_instance_uid: str
    series_instance_uid: str
    sop_class_uid: str
    sop_instance_uid: str


@dataclass(frozen=True)
class SRMeta:
    """Series/instance identity and document flags for a created SR.

    Model outputs default to COMPLETE + UNVERIFIED: they await expert
    review before entering the record as verified content.
    """

    series_instance_uid: str | None = None
    sop_instance_uid: str | None = None
    series_number: int = 1
    instance_number: int = 1
    completion: CompletionFlag = CompletionFlag.COMPLETE
    verification: VerificationFlag = VerificationFlag.UNVERIFIED
    predecessors: tuple[DocumentReference, ...] = ()
    manufacturer: str = "dicomforge"
    institution: str | None = None
    series_description: str | None = None
    verifying_observer_name: str | None = None
    verifying_organization: str | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "predecessors",
            tuple(DocumentReference(*p) for p in self.predecessors),
        )
        if (
            self.verification is VerificationFlag.VERIFIED
            and not self.verifying_observer_name
        ):
            raise ValueError("a VERIFIED document needs a verifying observer")


def _forbid_3d(tree: ContentItem) -> None:
    for item in tree.iter():
        if item.value_type is ValueType.SCOORD3D:
            raise ValueTypeForbiddenError(
                "COMPREHENSIVE documents cannot hold SCOORD3D items; "
                "use COMPREHENSIVE_3D"
            )


def _referenced_instance_uids(tree: ContentItem) -> set[str]:
    uids = set()
    for item in tree.iter():
        if isinstance(item, ImageItem):
            uids.add(item.sop_instance_uid)
    return uids


def create_sr(
    kind: SRKind,
    evidence: Sequence[DataSet],
    tree: ContainerItem,
    meta: SRMeta | None = None,
) -> DataSet:
    """Build an SR instance around a measurement-report tree.

    Patient/study/specimen attributes are copied verbatim from the first
    evidence instance; all evidence must belong to one study, and every
    image instance the tree references must appear in the evidence list.
    """
    meta = meta or SRMeta()
    evidence = check_evidence(evidence)
    if not isinstance(tree, ContainerItem) or tree.relationship is not None:
        raise TemplateViolationError("the content tree root must be an unrelated CONTAINER")
    if tree.name is None or tree.name != DCM.ImagingMeasurementReport:
        raise TemplateViolationError("the content tree must be a measurement report")
    if kind is SRKind.COMPREHENSIVE:
        _forbid_3d(tree)

    evidence_uids = {ds.value("SOPInstanceUID") for ds in evidence}
    missing = _referenced_instance_uids(tree) - evidence_uids
    if missing:
        raise EvidenceError(
            "tree references instances absent from evidence: "
            + ", ".join(sorted(missing))
        )

    ds = DataSet()
    ds.put("SpecificCharacterSet", "ISO_IR 192")
    ds.put("SOPClassUID", kind.sop_class_uid)
    ds.put("SOPInstanceUID", meta.sop_instance_uid or new_uid())
    copy_patient_study(evidence[0], ds)
    ds.put("Modality", "SR")
    ds.put("SeriesInstanceUID", meta.series_instance_uid or new_uid())
    ds.put("SeriesNumber", meta.series_number)
    ds.put("InstanceNumber", meta.instance_number)
    ds.put("Manufacturer", meta.manufacturer)
    if meta.institution:
        ds.put("InstitutionName", meta.institution)
    if meta.series_description:
        ds.put("SeriesDescription", meta.series_description)
    content_timestamp(ds)
    ds.put("CompletionFlag", meta.completion.value)
    ds.put("VerificationFlag", meta.verification.value)
    if meta.verification is VerificationFlag.VERIFIED:
        observer = DataSet()
        observer.put("VerifyingObserverName", meta.verifying_observer_name)
        observer.put("VerifyingOrganization", meta.verifying_organization or "")
        observer.put(
            "VerificationDateTime",
            ds.value("ContentDate") + ds.value("ContentTime"),
        )
        ds.put("VerifyingObserverSequence", (observer,))
    if meta.predecessors:
        items = []
        for ref in meta.predecessors:
            sop = DataSet()
            sop.put("ReferencedSOPClassUID", kind.sop_class_uid)
            sop.put("ReferencedSOPInstanceUID", ref.sop_instance_uid)
            series = DataSet()
            series.put("SeriesInstanceUID", ref.series_instance_uid)
            series.put("ReferencedSOPSequence", (sop,))
            study = DataSet()
            study.put("StudyInstanceUID", ref.study_instance_uid)
            study.put("ReferencedSeriesSequence", (series,))
            items.append(study)
        ds.put("PredecessorDocumentsSequence", tuple(items))
    ds.put("CurrentRequestedProcedureEvidenceSequence", evidence_sequence(evidence))

    root = item_to_dataset(tree)
    for element in root:
        ds.add(element)
    return ds


# -- parsing ------------------------------------------------------------------


class GroupKind(str, enum.Enum):
    PLANAR = "planar"
    VOLUMETRIC = "volumetric"
    IMAGE = "image-level"


_TEMPLATE_KIND = {
    PLANAR_GROUP_TID: GroupKind.PLANAR,
    VOLUMETRIC_GROUP_TID: GroupKind.VOLUMETRIC,
    IMAGE_GROUP_TID: GroupKind.IMAGE,
}


@dataclass(frozen=True)
class SegmentRegion:
    """Region by reference: one segment of a segmentation instance."""

    sop_instance_uid: str
    segment_number: int
    sop_class_uid: str | None = None


@dataclass(frozen=True)
class WorldRegion:
    """3D frame-of-reference geometry (one or more point sets, mm)."""

    polygons: tuple[np.ndarray, ...]
    frame_of_reference_uid: str

    @property
    def points(self) -> np.ndarray:
        return np.vstack(self.polygons)


@dataclass(frozen=True)
class PixelRegion:
    """2D pixel-matrix geometry plus the image it indexes into."""

    points: np.ndarray
    source: ImageReference | None


@dataclass(frozen=True)
class MeasurementGroupView:
    """Read-only projection of one measurement-group subtree."""

    kind: GroupKind
    tracking: TrackingIdentifier | None
    finding: CodedConcept | None
    finding_sites: tuple[CodedConcept, ...]
    measurements: tuple[tuple[CodedConcept, str, CodedConcept], ...]
    evaluations: tuple[tuple[CodedConcept, CodedConcept], ...]
    container: ContainerItem = field(repr=False)
    _segment_items: tuple[ImageItem, ...] = field(repr=False)
    _scoord_items: tuple[ScoordItem, ...] = field(repr=False)
    _scoord3d_items: tuple[Scoord3DItem, ...] = field(repr=False)

    @property
    def has_region(self) -> bool:
        return bool(self._segment_items or self._scoord_items or self._scoord3d_items)

    def geometry(self):
        """The group's region geometry.

        Returns a SegmentRegion, a WorldRegion (3D), a PixelRegion (2D), or
        a tuple of PixelRegion for per-frame 2D contours. Image-level
        groups have no geometry and raise NoGeometryError.
        """
        if self._segment_items:
            item = self._segment_items[0]
            return SegmentRegion(
                sop_instance_uid=item.sop_instance_uid,
                segment_number=item.segment_number,
                sop_class_uid=item.sop_class_uid,
            )
        if self._scoord3d_items:
            return WorldRegion(
                polygons=tuple(i.points for i in self._scoord3d_items),
                frame_of_reference_uid=self._scoord3d_items[0].frame_of_reference_uid,
            )
        if self._scoord_items:
            regions = []
            for item in self._scoord_items:
                source = item.source_image()
                ref = None
                if source is not None:
                    ref = ImageReference(
                        sop_class_uid=source.sop_class_uid,
                        sop_instance_uid=source.sop_instance_uid,
                        frame_numbers=source.frame_numbers,
                    )
                regions.append(PixelRegion(points=item.points, source=ref))
            return regions[0] if len(regions) == 1 else tuple(regions)
        raise NoGeometryError("image-level measurement groups carry no region")


def _project_group(container: ContainerItem) -> MeasurementGroupView:
    tracking_uid = None
    tracking_id = None
    finding = None
    sites = []
    measurements = []
    evaluations = []
    segments = []
    scoords = []
    scoord3ds = []
    for item in container.children:
        if item.value_type is ValueType.UIDREF and item.name == DCM.TrackingUniqueIdentifier:
            tracking_uid = item.value
        elif item.value_type is ValueType.TEXT and item.name == DCM.TrackingIdentifier:
            tracking_id = item.value
        elif item.value_type is ValueType.CODE:
            if item.name == DCM.Finding:
                finding = item.value
            elif item.name == SCT.FindingSite:
                sites.append(item.value)
            else:
                evaluations.append((item.name, item.value))
        elif item.value_type is ValueType.NUM:
            measurements.append((item.name, item.value, item.unit))
        elif isinstance(item, ImageItem) and item.segment_number is not None:
            segments.append(item)
        elif isinstance(item, ScoordItem):
            scoords.append(item)
        elif isinstance(item, Scoord3DItem):
            scoord3ds.append(item)
    kind = _TEMPLATE_KIND.get(container.template_id or "")
    if kind is None:
        if segments or len(scoords) + len(scoord3ds) > 1:
            kind = GroupKind.VOLUMETRIC
        elif scoords or scoord3ds:
            kind = GroupKind.PLANAR
        else:
            kind = GroupKind.IMAGE
    tracking = (
        TrackingIdentifier(uid=tracking_uid, identifier=tracking_id)
        if tracking_uid
        else None
    )
    return MeasurementGroupView(
        kind=kind,
        tracking=tracking,
        finding=finding,
        finding_sites=tuple(sites),
        measurements=tuple(measurements),
        evaluations=tuple(evaluations),
        container=container,
        _segment_items=tuple(segments),
        _scoord_items=tuple(scoords),
        _scoord3d_items=tuple(scoord3ds),
    )


class StructuredReport:
    """Read-only view over an SR dataset."""

    def __init__(self, dataset: DataSet):
        sop_class = dataset.value("SOPClassUID", "")
        self.kind = SRKind.from_sop_class(sop_class)
        if "ContentSequence" not in dataset:
            raise MissingContentError(
                "SR dataset has no ContentSequence attribute: the document "
                "carries no content items to iterate over"
            )
        self.dataset = dataset
        root_ds = DataSet()
        for key in (
            "ValueType",
            "ConceptNameCodeSequence",
            "ContinuityOfContent",
            "ContentTemplateSequence",
            "ContentSequence",
        ):
            element = dataset.element(key)
            if element is not None:
                root_ds.add(element)
        root = item_from_dataset(root_ds)
        if not isinstance(root, ContainerItem):
            raise MissingContentError("SR root content item is not a CONTAINER")
        self.tree: ContainerItem = root
        self.completion = CompletionFlag(dataset.value("CompletionFlag", "COMPLETE"))
        self.verification = VerificationFlag(
            dataset.value("VerificationFlag", "UNVERIFIED")
        )
        self.sop_instance_uid = dataset.value("SOPInstanceUID", "")
        self.series_instance_uid = dataset.value("SeriesInstanceUID", "")
        self.predecessors = self._parse_predecessors(dataset)
        self.evidence = self._parse_evidence(dataset)

    @staticmethod
    def _parse_predecessors(dataset: DataSet) -> tuple[DocumentReference, ...]:
        out = []
        for study in dataset.items_of("PredecessorDocumentsSequence"):
            for series in study.items_of("ReferencedSeriesSequence"):
                for sop in series.items_of("ReferencedSOPSequence"):
                    out.append(DocumentReference(
                        study.value("StudyInstanceUID", ""),
                        series.value("SeriesInstanceUID", ""),
                        sop.value("ReferencedSOPInstanceUID", ""),
                    ))
        return tuple(out)

    @staticmethod
    def _parse_evidence(dataset: DataSet) -> tuple[EvidenceReference, ...]:
        out = []
        for study in dataset.items_of("CurrentRequestedProcedureEvidenceSequence"):
            for series in study.items_of("ReferencedSeriesSequence"):
                for sop in series.items_of("ReferencedSOPSequence"):
                    out.append(EvidenceReference(
                        study.value("StudyInstanceUID", ""),
                        series.value("SeriesInstanceUID", ""),
                        sop.value("ReferencedSOPClassUID", ""),
                        sop.value("ReferencedSOPInstanceUID", ""),
                    ))
        return tuple(out)

    def measurement_groups(
        self,
        finding: CodedConcept | None = None,
        finding_site: CodedConcept | None = None,
        tracking_uid: str | None = None,
        kind: GroupKind | str | None = None,
    ) -> list[MeasurementGroupView]:
        """Group views matching every supplied filter, in document order."""
        if kind is not None:
            kind = GroupKind(kind)
        groups = []
        for measurements_container in self.tree.find(
            name=DCM.ImagingMeasurements, value_type=ValueType.CONTAINER
        ):
            for child in measurements_container.children:
                if isinstance(child, ContainerItem):
                    groups.append(_project_group(child))
        out = []
        for group in groups:
            if finding is not None and (group.finding is None or group.finding != finding):
                continue
            if finding_site is not None and finding_site not in group.finding_sites:
                continue
            if tracking_uid is not None and (
                group.tracking is None or group.tracking.uid != tracking_uid
            ):
                continue
            if kind is not None and group.kind is not kind:
                continue
            out.append(group)
        return out


def open_sr(dataset: DataSet) -> StructuredReport:
    """View an existing SR dataset (created here, read from file, or received
    over the network)."""
    return StructuredReport(dataset)
