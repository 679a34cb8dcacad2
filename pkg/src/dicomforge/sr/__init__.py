"""Structured reporting: content items, templates, and SR documents."""

from .items import (
    AlgorithmIdentification,
    CodeItem,
    CompositeItem,
    ContainerItem,
    ContentItem,
    ContinuityOfContent,
    DateTimeItem,
    GraphicType2D,
    GraphicType3D,
    ImageItem,
    NumItem,
    ObserverContext,
    ObserverType,
    PNameItem,
    RelationshipType,
    ScoordItem,
    Scoord3DItem,
    TextItem,
    TrackingIdentifier,
    UIDRefItem,
    ValueType,
    find_items,
    item_from_dataset,
    item_to_dataset,
    make_content_item,
)
from .templates import (
    ImageReference,
    SegmentReference,
    measurement_group,
    measurement_report,
    planar_roi_group,
    volumetric_roi_group,
)
from .document import (
    CompletionFlag,
    DocumentReference,
    EvidenceReference,
    GroupKind,
    MeasurementGroupView,
    PixelRegion,
    SegmentRegion,
    SRKind,
    SRMeta,
    StructuredReport,
    VerificationFlag,
    WorldRegion,
    create_sr,
    open_sr,
)

__all__ = [name for name in dir() if not name.startswith("_")]
