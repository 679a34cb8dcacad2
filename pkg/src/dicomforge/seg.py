"""Segmentation images: creation, parsing, and pixel reconstruction.

A created SEG is a multi-frame object holding one stack of mask frames per
segment. Binary segments are bit-packed least-significant-bit first in
row-major pixel order, all frames concatenated before the final byte-align
padding; fractional segments store one byte per pixel, quantized to
0..max_fractional_value (round half up).

Frames are emitted segment-major (all frames of segment 1 in source order,
then segment 2, ...). With `omit_empty`, all-zero frames are skipped; they
are reconstituted as zero arrays on read because the full source list is
recorded at the root, so omitted frames stay distinguishable from frames
of unknown instances.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .coding import DCM, CodedConcept, concept_from_items, concept_to_items
from .dataset import DataSet
from .derived import (
    check_evidence,
    content_timestamp,
    copy_patient_study,
    referenced_series_sequence,
)
from .errors import (
    GeometryMismatchError,
    MalformedSegError,
    MaskShapeError,
    MaskValueError,
    SegmentNumberingError,
    UnmappedFrameError,
    WrongSopClassError,
)
from .spatial import PlaneGeometry
from .sr.items import AlgorithmIdentification, TrackingIdentifier
from .uid import SEGMENTATION_STORAGE, new_uid


class FractionalKind(str, enum.Enum):
    PROBABILITY = "PROBABILITY"
    OCCUPANCY = "OCCUPANCY"


@dataclass(frozen=True)
class SegmentationType:
    """BINARY, or FRACTIONAL with a kind and a maximum stored value."""

    kind: str
    fractional_kind: FractionalKind | None = None
    max_fractional_value: int | None = None

    def __post_init__(self):
        if self.kind not in ("BINARY", "FRACTIONAL"):
            raise ValueError("segmentation type is BINARY or FRACTIONAL")
        if self.kind == "FRACTIONAL":
            if self.fractional_kind is None:
                raise ValueError("fractional segmentations need a fractional kind")
            if not 1 <= (self.max_fractional_value or 0) <= 255:
                raise ValueError("max fractional value must be within 1..255")
        elif self.fractional_kind is not None or self.max_fractional_value is not None:
            raise ValueError("BINARY segmentations carry no fractional fields")

    @classmethod
    def binary(cls) -> "SegmentationType":
        return cls("BINARY")

    @classmethod
    def fractional(
        cls,
        fractional_kind: FractionalKind | str = FractionalKind.PROBABILITY,
        max_fractional_value: int = 255,
    ) -> "SegmentationType":
        return cls("FRACTIONAL", FractionalKind(fractional_kind),
                   int(max_fractional_value))

    @property
    def is_binary(self) -> bool:
        return self.kind == "BINARY"


class AlgorithmType(str, enum.Enum):
    AUTOMATIC = "AUTOMATIC"
    SEMIAUTOMATIC = "SEMIAUTOMATIC"
    MANUAL = "MANUAL"


@dataclass(frozen=True)
class SegmentDescription:
    """Identity and meaning of one segment."""

    number: int
    label: str
    category: CodedConcept
    property_type: CodedConcept
    algorithm_type: AlgorithmType = AlgorithmType.AUTOMATIC
    algorithm: AlgorithmIdentification | None = None
    anatomic_site: CodedConcept | None = None
    tracking: TrackingIdentifier | None = None

    def __post_init__(self):
        object.__setattr__(self, "algorithm_type", AlgorithmType(self.algorithm_type))
        if self.number < 1:
            raise SegmentNumberingError("segment numbers start at 1")
        if self.algorithm_type is not AlgorithmType.MANUAL and self.algorithm is None:
            raise ValueError(
                f"{self.algorithm_type.value} segments need an algorithm identification"
            )


@dataclass(frozen=True)
class PlanePositionPatient:
    """Patient-frame position of a frame's top-left pixel center (DS strings)."""

    coordinates: tuple[str, str, str]

    @property
    def xyz(self) -> tuple[float, float, float]:
        return tuple(float(c) for c in self.coordinates)


@dataclass(frozen=True)
class PlanePositionSlide:
    """Slide-frame position: mm offsets plus total-pixel-matrix indices."""

    coordinates: tuple[str, str, str]
    matrix_row: int
    matrix_column: int

    @property
    def xyz(self) -> tuple[float, float, float]:
        return tuple(float(c) for c in self.coordinates)


@dataclass(frozen=True)
class FrameRecord:
    """Bookkeeping for one emitted SEG frame."""

    index: int
    segment_number: int
    source_sop_class_uid: str
    source_sop_instance_uid: str
    source_frame_number: int
    position: PlanePositionPatient | PlanePositionSlide


# -- bit packing --------------------------------------------------------------


def pack_bits(frames: np.ndarray) -> bytes:
    """Pack {0,1} pixels LSB-first, frames concatenated before end padding."""
    bits = np.ascontiguousarray(frames, dtype=np.uint8).ravel()
    if bits.size == 0:
        return b""
    return np.packbits(bits, bitorder="little").tobytes()


def unpack_bits(data: bytes, count: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`: the first `count` bits as a uint8 array."""
    if count == 0:
        return np.zeros(0, dtype=np.uint8)
    available = len(data) * 8
    if count > available:
        raise MalformedSegError(
            f"pixel data holds {available} bits, {count} needed"
        )
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8),
                         count=count, bitorder="little")


def quantize_fraction(values: np.ndarray, max_value: int) -> np.ndarray:
    """[0, 1] floats -> stored integers 0..max_value, rounding half up."""
    return np.floor(np.asarray(values, dtype=np.float64) * max_value + 0.5).astype(np.uint8)


# -- source-frame resolution ---------------------------------------------------


@dataclass(frozen=True)
class _SourceFrame:
    sop_class_uid: str
    sop_instance_uid: str
    frame_number: int
    multiframe: bool
    position: PlanePositionPatient | PlanePositionSlide


def _slide_position(item: DataSet) -> PlanePositionSlide:
    pos = item.items_of("PlanePositionSlideSequence")[0]
    return PlanePositionSlide(
        coordinates=(
            pos.value("XOffsetInSlideCoordinateSystem", "0"),
            pos.value("YOffsetInSlideCoordinateSystem", "0"),
            pos.value("ZOffsetInSlideCoordinateSystem", "0"),
        ),
        matrix_row=int(pos.value("RowPositionInTotalImagePixelMatrix", 1)),
        matrix_column=int(pos.value("ColumnPositionInTotalImagePixelMatrix", 1)),
    )


def _resolve_sources(sources: Sequence[DataSet]):
    """Flatten sources into per-frame descriptors plus shared geometry.

    Sources must agree on shape, orientation, and pixel spacing; mismatched
    geometry is rejected rather than resampled.
    """
    first = sources[0]
    rows = first.value("Rows")
    cols = first.value("Columns")
    slide_based = first.value("Modality") == "SM"
    frames: list[_SourceFrame] = []

    if slide_based:
        if len(sources) != 1:
            raise GeometryMismatchError(
                "slide-based segmentation expects a single multi-frame source"
            )
        orientation = first.values("ImageOrientationSlide")
        shared = first.items_of("SharedFunctionalGroupsSequence")
        spacing = ()
        if shared:
            measures = shared[0].items_of("PixelMeasuresSequence")
            if measures:
                spacing = measures[0].values("PixelSpacing")
        per_frame = first.items_of("PerFrameFunctionalGroupsSequence")
        if not per_frame:
            raise GeometryMismatchError(
                "slide-based source lacks per-frame plane positions"
            )
        for i, item in enumerate(per_frame):
            frames.append(_SourceFrame(
                sop_class_uid=first.value("SOPClassUID"),
                sop_instance_uid=first.value("SOPInstanceUID"),
                frame_number=i + 1,
                multiframe=True,
                position=_slide_position(item),
            ))
        return frames, rows, cols, orientation, spacing, True

    orientation = first.values("ImageOrientationPatient")
    spacing = first.values("PixelSpacing")
    for ds in sources:
        if int(ds.value("NumberOfFrames", 1)) != 1:
            raise GeometryMismatchError(
                "multi-frame patient sources are not supported; pass the "
                "frames as individual instances"
            )
        if (ds.value("Rows"), ds.value("Columns")) != (rows, cols):
            raise GeometryMismatchError("sources disagree on Rows/Columns")
        if ds.values("ImageOrientationPatient") != orientation:
            raise GeometryMismatchError("sources disagree on orientation")
        if ds.values("PixelSpacing") != spacing:
            raise GeometryMismatchError("sources disagree on pixel spacing")
        coords = ds.values("ImagePositionPatient")
        if len(coords) != 3:
            raise GeometryMismatchError("source lacks ImagePositionPatient")
        frames.append(_SourceFrame(
            sop_class_uid=ds.value("SOPClassUID"),
            sop_instance_uid=ds.value("SOPInstanceUID"),
            frame_number=1,
            multiframe=False,
            position=PlanePositionPatient(coordinates=tuple(coords)),
        ))
    return frames, rows, cols, orientation, spacing, False


def _normalize_masks(masks, n_segments: int, n_frames: int, rows, cols,
                     seg_type: SegmentationType) -> np.ndarray:
    if isinstance(masks, np.ndarray) and masks.ndim == 4:
        stacks = [masks[i] for i in range(masks.shape[0])]
    else:
        stacks = list(masks)
    if len(stacks) != n_segments:
        raise MaskShapeError(
            f"{len(stacks)} mask stacks supplied for {n_segments} segments"
        )
    out = np.zeros((n_segments, n_frames, rows, cols), dtype=np.float64)
    for i, stack in enumerate(stacks):
        array = np.asarray(stack)
        if array.ndim == 2:
            array = array[np.newaxis]
        if array.shape != (n_frames, rows, cols):
            raise MaskShapeError(
                f"segment {i + 1} mask stack has shape {array.shape}, "
                f"expected {(n_frames, rows, cols)}"
            )
        out[i] = array
    if seg_type.is_binary:
        if not np.isin(out, (0, 1)).all():
            raise MaskValueError("binary masks may only contain 0 and 1")
    else:
        if out.min() < 0 or out.max() > 1:
            raise MaskValueError("fractional masks must lie within [0, 1]")
    return out


def create_seg(
    sources: Sequence[DataSet],
    masks,
    descriptions: Sequence[SegmentDescription],
    seg_type: SegmentationType,
    omit_empty: bool = True,
    *,
    series_instance_uid: str | None = None,
    sop_instance_uid: str | None = None,
    series_number: int = 1,
    instance_number: int = 1,
    manufacturer: str = "dicomforge",
    series_description: str | None = None,
) -> DataSet:
    """Encode per-segment mask stacks as a Segmentation instance.

    `masks` holds one stack per description, each aligned to the source
    frames (shape ``(frames, rows, cols)``; a bare 2D array is accepted for
    a single source frame). Binary masks must be 0/1 valued, fractional
    masks must lie in [0, 1].
    """
    sources = check_evidence(sources)
    descriptions = list(descriptions)
    if [d.number for d in descriptions] != list(range(1, len(descriptions) + 1)):
        raise SegmentNumberingError(
            "segment descriptions must be numbered consecutively from 1"
        )
    source_frames, rows, cols, orientation, spacing, slide_based = \
        _resolve_sources(sources)
    stacks = _normalize_masks(
        masks, len(descriptions), len(source_frames), rows, cols, seg_type
    )

    records: list[FrameRecord] = []
    frame_arrays: list[np.ndarray] = []
    for description in descriptions:
        stack = stacks[description.number - 1]
        for f, source in enumerate(source_frames):
            frame = stack[f]
            if omit_empty and not frame.any():
                continue
            records.append(FrameRecord(
                index=len(records),
                segment_number=description.number,
                source_sop_class_uid=source.sop_class_uid,
                source_sop_instance_uid=source.sop_instance_uid,
                source_frame_number=source.frame_number,
                position=source.position,
            ))
            frame_arrays.append(frame)

    if seg_type.is_binary:
        stacked = (
            np.stack(frame_arrays) if frame_arrays
            else np.zeros((0, rows, cols))
        )
        pixel_data = pack_bits(stacked.astype(np.uint8))
        bits_allocated = 1
    else:
        quantized = (
            quantize_fraction(np.stack(frame_arrays), seg_type.max_fractional_value)
            if frame_arrays else np.zeros((0, rows, cols), dtype=np.uint8)
        )
        pixel_data = quantized.tobytes()
        bits_allocated = 8

    ds = DataSet()
    ds.put("SpecificCharacterSet", "ISO_IR 192")
    ds.put("SOPClassUID", SEGMENTATION_STORAGE)
    ds.put("SOPInstanceUID", sop_instance_uid or new_uid())
    ds.put("ImageType", ["DERIVED", "PRIMARY"])
    copy_patient_study(sources[0], ds)
    ds.put("Modality", "SEG")
    ds.put("SeriesInstanceUID", series_instance_uid or new_uid())
    ds.put("SeriesNumber", series_number)
    ds.put("InstanceNumber", instance_number)
    ds.put("Manufacturer", manufacturer)
    if series_description:
        ds.put("SeriesDescription", series_description)
    content_timestamp(ds)
    ds.put("ContentLabel", "SEGMENTATION")
    frame_of_reference = sources[0].value("FrameOfReferenceUID")
    if frame_of_reference:
        ds.put("FrameOfReferenceUID", frame_of_reference)
    ds.put("PositionReferenceIndicator", "")

    ds.put("SamplesPerPixel", 1)
    ds.put("PhotometricInterpretation", "MONOCHROME2")
    ds.put("Rows", rows)
    ds.put("Columns", cols)
    ds.put("BitsAllocated", bits_allocated)
    ds.put("BitsStored", bits_allocated)
    ds.put("HighBit", bits_allocated - 1)
    ds.put("PixelRepresentation", 0)
    ds.put("LossyImageCompression", "00")
    ds.put("SegmentationType", seg_type.kind)
    if not seg_type.is_binary:
        ds.put("SegmentationFractionalType", seg_type.fractional_kind.value)
        ds.put("MaximumFractionalValue", seg_type.max_fractional_value)
    ds.put("NumberOfFrames", len(records))

    segment_items = []
    for description in descriptions:
        item = DataSet()
        item.put("SegmentNumber", description.number)
        item.put("SegmentLabel", description.label)
        item.put("SegmentAlgorithmType", description.algorithm_type.value)
        if description.algorithm is not None:
            item.put("SegmentAlgorithmName", description.algorithm.name)
        item.put(
            "SegmentedPropertyCategoryCodeSequence",
            (concept_to_items(description.category),),
        )
        item.put(
            "SegmentedPropertyTypeCodeSequence",
            (concept_to_items(description.property_type),),
        )
        if description.anatomic_site is not None:
            item.put(
                "AnatomicRegionSequence",
                (concept_to_items(description.anatomic_site),),
            )
        if description.tracking is not None:
            if description.tracking.identifier:
                item.put("TrackingID", description.tracking.identifier)
            item.put("TrackingUID", description.tracking.uid)
        segment_items.append(item)
    ds.put("SegmentSequence", tuple(segment_items))

    organization_uid = new_uid()
    organization = DataSet()
    organization.put("DimensionOrganizationUID", organization_uid)
    ds.put("DimensionOrganizationSequence", (organization,))
    index_items = []
    for pointer, group in (
        ("ReferencedSegmentNumber", "SegmentIdentificationSequence"),
        (
            "XOffsetInSlideCoordinateSystem" if slide_based else "ImagePositionPatient",
            "PlanePositionSlideSequence" if slide_based else "PlanePositionSequence",
        ),
    ):
        index = DataSet()
        index.put("DimensionOrganizationUID", organization_uid)
        index.put("DimensionIndexPointer", [_tag_of(pointer)])
        index.put("FunctionalGroupPointer", [_tag_of(group)])
        index_items.append(index)
    ds.put("DimensionIndexSequence", tuple(index_items))

    shared = DataSet()
    measures = DataSet()
    if spacing:
        measures.put("PixelSpacing", list(spacing))
        shared.put("PixelMeasuresSequence", (measures,))
    if slide_based:
        if orientation:
            ds.put("ImageOrientationSlide", list(orientation))
    else:
        plane_orientation = DataSet()
        plane_orientation.put("ImageOrientationPatient", list(orientation))
        shared.put("PlaneOrientationSequence", (plane_orientation,))
    ds.put("SharedFunctionalGroupsSequence", (shared,))

    per_frame_items = []
    for record in records:
        item = DataSet()
        frame_content = DataSet()
        frame_content.put(
            "DimensionIndexValues",
            [record.segment_number, record.source_frame_number],
        )
        item.put("FrameContentSequence", (frame_content,))
        if isinstance(record.position, PlanePositionSlide):
            pos = DataSet()
            pos.put("XOffsetInSlideCoordinateSystem", record.position.coordinates[0])
            pos.put("YOffsetInSlideCoordinateSystem", record.position.coordinates[1])
            pos.put("ZOffsetInSlideCoordinateSystem", record.position.coordinates[2])
            pos.put("RowPositionInTotalImagePixelMatrix", record.position.matrix_row)
            pos.put("ColumnPositionInTotalImagePixelMatrix",
                    record.position.matrix_column)
            item.put("PlanePositionSlideSequence", (pos,))
        else:
            pos = DataSet()
            pos.put("ImagePositionPatient", list(record.position.coordinates))
            item.put("PlanePositionSequence", (pos,))
        ident = DataSet()
        ident.put("ReferencedSegmentNumber", record.segment_number)
        item.put("SegmentIdentificationSequence", (ident,))
        source_ref = DataSet()
        source_ref.put("ReferencedSOPClassUID", record.source_sop_class_uid)
        source_ref.put("ReferencedSOPInstanceUID", record.source_sop_instance_uid)
        if any(s.multiframe for s in source_frames):
            source_ref.put("ReferencedFrameNumber", record.source_frame_number)
        source_ref.put(
            "PurposeOfReferenceCodeSequence",
            (concept_to_items(DCM.SourceImageForImageProcessingOperation),),
        )
        derivation = DataSet()
        derivation.put("SourceImageSequence", (source_ref,))
        derivation.put(
            "DerivationCodeSequence", (concept_to_items(DCM.Segmentation),)
        )
        item.put("DerivationImageSequence", (derivation,))
        per_frame_items.append(item)
    ds.put("PerFrameFunctionalGroupsSequence", tuple(per_frame_items))

    ds.put("ReferencedSeriesSequence", referenced_series_sequence(sources))
    ds.put("PixelData", pixel_data)
    return ds


def _tag_of(keyword: str):
    from .tags import KEYWORD_TO_TAG

    return KEYWORD_TO_TAG[keyword]


# -- parsing -------------------------------------------------------------------


class Segmentation:
    """Read-only view over a SEG dataset."""

    def __init__(self, dataset: DataSet):
        if dataset.value("SOPClassUID") != SEGMENTATION_STORAGE:
            raise WrongSopClassError(
                f"not a Segmentation instance: {dataset.value('SOPClassUID')!r}"
            )
        self.dataset = dataset
        self.rows = int(dataset.value("Rows", 0))
        self.columns = int(dataset.value("Columns", 0))
        self.number_of_frames = int(dataset.value("NumberOfFrames", 0))
        self.sop_instance_uid = dataset.value("SOPInstanceUID", "")
        kind = dataset.value("SegmentationType", "")
        if kind == "BINARY":
            self.seg_type = SegmentationType.binary()
        elif kind == "FRACTIONAL":
            self.seg_type = SegmentationType.fractional(
                dataset.value("SegmentationFractionalType", "PROBABILITY"),
                int(dataset.value("MaximumFractionalValue", 255)),
            )
        else:
            raise MalformedSegError(f"unknown segmentation type {kind!r}")
        self.descriptions = self._parse_descriptions(dataset)
        self.frames = self._parse_frames(dataset)
        if len(self.frames) != self.number_of_frames:
            raise MalformedSegError(
                f"per-frame groups ({len(self.frames)}) disagree with "
                f"NumberOfFrames ({self.number_of_frames})"
            )
        self._check_pixel_length()
        self._frame_index = {
            (r.segment_number, r.source_sop_instance_uid, r.source_frame_number): r
            for r in self.frames
        }
        self._referenced_instances = {
            ref.value("ReferencedSOPInstanceUID")
            for series in dataset.items_of("ReferencedSeriesSequence")
            for ref in series.items_of("ReferencedInstanceSequence")
        }

    @staticmethod
    def _parse_descriptions(dataset: DataSet) -> tuple[SegmentDescription, ...]:
        out = []
        for item in dataset.items_of("SegmentSequence"):
            algorithm_type = AlgorithmType(item.value("SegmentAlgorithmType", "MANUAL"))
            algorithm = None
            if item.value("SegmentAlgorithmName"):
                algorithm = AlgorithmIdentification(
                    name=item.value("SegmentAlgorithmName"), version="unknown"
                )
            tracking = None
            if item.value("TrackingUID"):
                tracking = TrackingIdentifier(
                    uid=item.value("TrackingUID"),
                    identifier=item.value("TrackingID"),
                )
            category_items = item.items_of("SegmentedPropertyCategoryCodeSequence")
            type_items = item.items_of("SegmentedPropertyTypeCodeSequence")
            site_items = item.items_of("AnatomicRegionSequence")
            out.append(SegmentDescription(
                number=int(item.value("SegmentNumber")),
                label=item.value("SegmentLabel", ""),
                category=concept_from_items(category_items[0]) if category_items
                else CodedConcept("unknown", "99UNKNOWN", "unknown"),
                property_type=concept_from_items(type_items[0]) if type_items
                else CodedConcept("unknown", "99UNKNOWN", "unknown"),
                algorithm_type=algorithm_type,
                algorithm=algorithm,
                anatomic_site=concept_from_items(site_items[0]) if site_items else None,
                tracking=tracking,
            ))
        return tuple(out)

    @staticmethod
    def _parse_frames(dataset: DataSet) -> tuple[FrameRecord, ...]:
        records = []
        for i, item in enumerate(dataset.items_of("PerFrameFunctionalGroupsSequence")):
            ident_items = item.items_of("SegmentIdentificationSequence")
            if not ident_items:
                raise MalformedSegError(f"frame {i + 1} lacks a segment identification")
            segment = int(ident_items[0].value("ReferencedSegmentNumber"))
            sop_class = ""
            sop_instance = ""
            frame_number = 1
            derivation = item.items_of("DerivationImageSequence")
            if derivation:
                source_items = derivation[0].items_of("SourceImageSequence")
                if source_items:
                    sop_class = source_items[0].value("ReferencedSOPClassUID", "")
                    sop_instance = source_items[0].value("ReferencedSOPInstanceUID", "")
                    frame_number = int(source_items[0].value("ReferencedFrameNumber", 1))
            if item.items_of("PlanePositionSlideSequence"):
                position = _slide_position(item)
            else:
                pos_items = item.items_of("PlanePositionSequence")
                coords = (
                    pos_items[0].values("ImagePositionPatient") if pos_items else ()
                )
                position = PlanePositionPatient(
                    coordinates=tuple(coords) if len(coords) == 3 else ("0", "0", "0")
                )
            records.append(FrameRecord(
                index=i,
                segment_number=segment,
                source_sop_class_uid=sop_class,
                source_sop_instance_uid=sop_instance,
                source_frame_number=frame_number,
                position=position,
            ))
        return tuple(records)

    def _check_pixel_length(self) -> None:
        element = self.dataset.element("PixelData")
        actual = len(element.raw) if element is not None else 0
        pixels = self.number_of_frames * self.rows * self.columns
        if self.seg_type.is_binary:
            expected = math.ceil(pixels / 8)
        else:
            expected = pixels
        if actual not in (expected, expected + (expected % 2)):
            raise MalformedSegError(
                f"pixel data is {actual} bytes; {expected} expected for "
                f"{self.number_of_frames} frame(s) of {self.rows}x{self.columns}"
            )

    @cached_property
    def _frame_pixels(self) -> np.ndarray:
        """All stored frames as (frames, rows, cols) uint8."""
        element = self.dataset.element("PixelData")
        data = element.raw if element is not None else b""
        pixels = self.number_of_frames * self.rows * self.columns
        if self.seg_type.is_binary:
            flat = unpack_bits(data, pixels)
        else:
            flat = np.frombuffer(data[:pixels], dtype=np.uint8)
        return flat.reshape(self.number_of_frames, self.rows, self.columns)

    # -- queries ---------------------------------------------------------

    def stored_frame(self, index: int) -> np.ndarray:
        """Raw stored values of one emitted frame (no rescaling)."""
        return self._frame_pixels[index]

    def find_segments(
        self,
        label: str | None = None,
        category: CodedConcept | None = None,
        property_type: CodedConcept | None = None,
        tracking_uid: str | None = None,
    ) -> list[int]:
        """Segment numbers matching every supplied filter, ascending."""
        out = []
        for d in self.descriptions:
            if label is not None and d.label != label:
                continue
            if category is not None and d.category != category:
                continue
            if property_type is not None and d.property_type != property_type:
                continue
            if tracking_uid is not None and (
                d.tracking is None or d.tracking.uid != tracking_uid
            ):
                continue
            out.append(d.number)
        return sorted(out)

    def _segment_numbers(self) -> list[int]:
        return [d.number for d in self.descriptions]

    @staticmethod
    def _frame_key(source_frame) -> tuple[str, int]:
        if isinstance(source_frame, tuple):
            uid, number = source_frame
            return str(uid), int(number)
        return str(source_frame), 1

    def segment_pixels(self, segment: int, source_frames: Sequence) -> np.ndarray:
        """Masks of one segment aligned to the requested source frames.

        Source frames are addressed by SOP instance UID (single-frame
        sources) or by an (instance UID, frame number) pair. Frames omitted
        as empty come back as zero arrays; unknown instances raise.
        Binary values are 0/1; fractional values are rescaled to [0, 1].
        """
        if segment not in self._segment_numbers():
            raise UnmappedFrameError(f"no segment number {segment}")
        out = np.zeros((len(source_frames), self.rows, self.columns), dtype=np.float64)
        for i, requested in enumerate(source_frames):
            uid, number = self._frame_key(requested)
            record = self._frame_index.get((segment, uid, number))
            if record is None:
                if uid not in self._referenced_instances:
                    raise UnmappedFrameError(
                        f"source frame ({uid}, {number}) is not referenced by "
                        "this segmentation"
                    )
                continue  # omitted empty frame: stays zero
            out[i] = self._frame_pixels[record.index]
        if self.seg_type.is_binary:
            return out.astype(np.uint8)
        return out / self.seg_type.max_fractional_value

    def label_map(self, source_frame, segments: Sequence[int] | None = None) -> np.ndarray:
        """Per-pixel segment numbers for one source frame (BINARY only).

        Where several selected segments overlap, the highest segment number
        wins. Fractional segmentations must be thresholded into masks first.
        """
        if not self.seg_type.is_binary:
            raise TypeError(
                "label maps require a BINARY segmentation; threshold the "
                "fractional frames into binary masks first"
            )
        numbers = sorted(segments) if segments is not None else self._segment_numbers()
        out = np.zeros((self.rows, self.columns), dtype=np.int32)
        for number in numbers:
            mask = self.segment_pixels(number, [source_frame])[0]
            out[mask == 1] = number
        return out

    def source_frame_keys(self) -> list[tuple[str, int]]:
        """Referenced source frames as ordered (instance UID, frame) keys.

        Single-frame sources appear in root reference order with frame 1;
        a multi-frame source expands to frames 1..max frame referenced.
        """
        ordered_uids = [
            ref.value("ReferencedSOPInstanceUID")
            for series in self.dataset.items_of("ReferencedSeriesSequence")
            for ref in series.items_of("ReferencedInstanceSequence")
        ]
        max_frame = max((r.source_frame_number for r in self.frames), default=1)
        if len(ordered_uids) == 1 and max_frame > 1:
            return [(ordered_uids[0], n) for n in range(1, max_frame + 1)]
        return [(uid, 1) for uid in ordered_uids]

    def plane_geometry(self, record: FrameRecord) -> PlaneGeometry:
        """Plane geometry of one frame (for pixel <-> mm conversion)."""
        shared = self.dataset.items_of("SharedFunctionalGroupsSequence")
        spacing = ()
        orientation = ()
        if shared:
            measures = shared[0].items_of("PixelMeasuresSequence")
            if measures:
                spacing = measures[0].floats("PixelSpacing")
            plane = shared[0].items_of("PlaneOrientationSequence")
            if plane:
                orientation = plane[0].floats("ImageOrientationPatient")
        if not orientation:
            orientation = self.dataset.floats("ImageOrientationSlide")
        if len(orientation) != 6 or len(spacing) != 2:
            raise MalformedSegError("segmentation lacks orientation/spacing")
        return PlaneGeometry(
            position=record.position.xyz,
            orientation=tuple(orientation),
            spacing=tuple(spacing),
        )


def open_seg(dataset: DataSet) -> Segmentation:
    """View an existing SEG dataset."""
    return Segmentation(dataset)
