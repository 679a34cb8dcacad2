"""SR document creation/parsing: evidence, metadata copy, group filtering."""
import numpy as np
import pytest

from conftest import make_ct_series, make_ct_source
from dicomforge.codec import decode_dataset, encode_dataset
from dicomforge.coding import DCM, SCT, UCUM, CodedConcept
from dicomforge.dataset import DataSet
from dicomforge.errors import (
    EvidenceError,
    MissingContentError,
    NoGeometryError,
    TemplateViolationError,
    ValueTypeForbiddenError,
    WrongSopClassError,
)
from dicomforge.sr import (
    CodeItem,
    GroupKind,
    ImageItem,
    NumItem,
    ObserverContext,
    RelationshipType,
    ScoordItem,
    Scoord3DItem,
    SegmentReference,
    SegmentRegion,
    SRKind,
    SRMeta,
    TrackingIdentifier,
    VerificationFlag,
    WorldRegion,
    create_sr,
    measurement_group,
    measurement_report,
    open_sr,
    planar_roi_group,
    volumetric_roi_group,
)
from dicomforge.uid import COMPREHENSIVE_3D_SR_STORAGE, new_uid

OBSERVER = ObserverContext.device(name="detector", version="1.0")


def polygon(for_uid, offset=0.0):
    pts = [
        (0, 0, offset), (10, 0, offset), (10, 10, offset), (0, 10, offset),
        (0, 0, offset),
    ]
    return Scoord3DItem(None, "POLYGON", pts, for_uid)


def nodule_report(evidence, n_groups=1, finding=None):
    for_uid = evidence[0].value("FrameOfReferenceUID")
    groups = []
    for i in range(n_groups):
        groups.append(planar_roi_group(
            TrackingIdentifier.generate(f"Nodule {i + 1}"),
            polygon(for_uid, offset=float(i)),
            finding or SCT.Nodule,
            finding_sites=[SCT.Lung],
            measurements=[NumItem(SCT.Diameter, f"{7.5 + i}", UCUM.mm)],
        ))
    return measurement_report(OBSERVER, SCT.ImagingProcedure, groups)


class TestCreate:
    def test_patient_id_copied_from_evidence(self, ct_series):
        tree = nodule_report(ct_series)
        ds = create_sr(SRKind.COMPREHENSIVE_3D, ct_series, tree)
        assert ds.value("PatientID") == "PAT-001"
        assert ds.value("StudyInstanceUID") == ct_series[0].value("StudyInstanceUID")
        assert ds.value("Modality") == "SR"
        assert ds.value("SOPClassUID") == COMPREHENSIVE_3D_SR_STORAGE

    def test_evidence_grouped_by_study_and_series(self):
        a = make_ct_series(2)
        study_uid = a[0].value("StudyInstanceUID")
        b = make_ct_source(study_uid=study_uid)
        evidence = [*a, b]  # 2 series, 3 instances, 1 study
        ds = create_sr(SRKind.COMPREHENSIVE_3D, evidence, nodule_report(a))
        [study_item] = ds.items_of("CurrentRequestedProcedureEvidenceSequence")
        series_items = study_item.items_of("ReferencedSeriesSequence")
        assert len(series_items) == 2
        total = sum(len(s.items_of("ReferencedSOPSequence")) for s in series_items)
        assert total == 3

    def test_scoord3d_forbidden_in_comprehensive(self, ct_series):
        tree = nodule_report(ct_series)
        with pytest.raises(ValueTypeForbiddenError):
            create_sr(SRKind.COMPREHENSIVE, ct_series, tree)

    def test_empty_evidence_rejected(self, ct_series):
        with pytest.raises(EvidenceError):
            create_sr(SRKind.COMPREHENSIVE_3D, [], nodule_report(ct_series))

    def test_mixed_study_evidence_rejected(self, ct_series):
        stray = make_ct_source()
        with pytest.raises(EvidenceError):
            create_sr(SRKind.COMPREHENSIVE_3D, [*ct_series, stray],
                      nodule_report(ct_series))

    def test_referenced_instance_must_be_evidence(self, ct_series):
        group = volumetric_roi_group(
            TrackingIdentifier.generate(),
            SegmentReference(new_uid(), 1),
            SCT.Nodule,
        )
        tree = measurement_report(OBSERVER, SCT.ImagingProcedure, [group])
        with pytest.raises(EvidenceError):
            create_sr(SRKind.COMPREHENSIVE_3D, ct_series, tree)

    def test_non_report_tree_rejected(self, ct_series):
        group = measurement_group(TrackingIdentifier.generate(), SCT.Neoplasm)
        with pytest.raises(TemplateViolationError):
            create_sr(SRKind.COMPREHENSIVE_3D, ct_series, group)

    def test_flags_default_complete_unverified(self, ct_series):
        ds = create_sr(SRKind.COMPREHENSIVE_3D, ct_series, nodule_report(ct_series))
        assert ds.value("CompletionFlag") == "COMPLETE"
        assert ds.value("VerificationFlag") == "UNVERIFIED"

    def test_verified_needs_observer(self):
        with pytest.raises(ValueError):
            SRMeta(verification=VerificationFlag.VERIFIED)

    def test_predecessor_references(self, ct_series):
        ref = (new_uid(), new_uid(), new_uid())
        meta = SRMeta(predecessors=(ref,))
        ds = create_sr(SRKind.COMPREHENSIVE_3D, ct_series,
                       nodule_report(ct_series), meta)
        doc = open_sr(ds)
        assert doc.predecessors[0].sop_instance_uid == ref[2]


class TestOpen:
    def test_round_trip_tree_equality(self, ct_series):
        tree = nodule_report(ct_series, n_groups=2)
        ds = create_sr(SRKind.COMPREHENSIVE_3D, ct_series, tree)
        reread = decode_dataset(encode_dataset(ds))
        doc = open_sr(reread)
        assert doc.tree == tree
        assert doc.kind is SRKind.COMPREHENSIVE_3D

    def test_missing_content_sequence(self, ct_source):
        ds = DataSet()
        ds.put("SOPClassUID", COMPREHENSIVE_3D_SR_STORAGE)
        ds.put("SOPInstanceUID", new_uid())
        with pytest.raises(MissingContentError) as excinfo:
            open_sr(ds)
        assert "ContentSequence" in str(excinfo.value)

    def test_wrong_sop_class(self, ct_source):
        with pytest.raises(WrongSopClassError):
            open_sr(ct_source)

    def test_evidence_references_exposed(self, ct_series):
        ds = create_sr(SRKind.COMPREHENSIVE_3D, ct_series, nodule_report(ct_series))
        doc = open_sr(ds)
        assert {r.sop_instance_uid for r in doc.evidence} == {
            s.value("SOPInstanceUID") for s in ct_series
        }


def test_comprehensive_document_never_carries_3d_items(ct_series):
    # scan-after-encode: whatever a COMPREHENSIVE create accepts, the encoded
    # stream holds no SCOORD3D value type anywhere
    source = ct_series[0]
    scoord = ScoordItem(
        None, "POLYLINE", [(0, 0), (3, 3)],
        children=[ImageItem(
            None, source.value("SOPClassUID"), source.value("SOPInstanceUID"),
            relationship=RelationshipType.SELECTED_FROM,
        )],
    )
    group = planar_roi_group(TrackingIdentifier.generate(), scoord, SCT.Neoplasm)
    tree = measurement_report(OBSERVER, SCT.ImagingProcedure, [group])
    ds = create_sr(SRKind.COMPREHENSIVE, ct_series, tree)
    reread = decode_dataset(encode_dataset(ds))

    def scan(dataset):
        assert dataset.value("ValueType") != "SCOORD3D"
        for element in dataset:
            if element.vr.value == "SQ":
                for item in element.values:
                    scan(item)

    scan(reread)


class TestMeasurementGroups:
    def test_filter_by_finding(self, ct_series):
        ds = create_sr(SRKind.COMPREHENSIVE_3D, ct_series,
                       nodule_report(ct_series, n_groups=3))
        doc = open_sr(ds)
        assert len(doc.measurement_groups(finding=SCT.Nodule)) == 3
        assert doc.measurement_groups(finding=SCT.Neoplasm) == []

    def test_filter_by_tracking_uid(self, ct_series):
        tree = nodule_report(ct_series, n_groups=3)
        ds = create_sr(SRKind.COMPREHENSIVE_3D, ct_series, tree)
        doc = open_sr(ds)
        groups = doc.measurement_groups()
        target = groups[1].tracking.uid
        found = doc.measurement_groups(tracking_uid=target)
        assert len(found) == 1
        assert found[0].tracking.uid == target

    def test_filter_by_finding_site_and_kind(self, ct_series):
        ds = create_sr(SRKind.COMPREHENSIVE_3D, ct_series,
                       nodule_report(ct_series, n_groups=2))
        doc = open_sr(ds)
        assert len(doc.measurement_groups(finding_site=SCT.Lung)) == 2
        assert len(doc.measurement_groups(kind=GroupKind.PLANAR)) == 2
        assert doc.measurement_groups(kind=GroupKind.VOLUMETRIC) == []

    def test_group_projection_fields(self, ct_series):
        ds = create_sr(SRKind.COMPREHENSIVE_3D, ct_series, nodule_report(ct_series))
        [group] = open_sr(ds).measurement_groups()
        assert group.finding == SCT.Nodule
        assert group.finding_sites == (SCT.Lung,)
        [(concept, value, unit)] = group.measurements
        assert concept == SCT.Diameter
        assert value == "7.5"
        assert unit == UCUM.mm
        assert group.tracking.identifier == "Nodule 1"

    def test_groups_against_find_items_independent_path(self, ct_series):
        tree = nodule_report(ct_series, n_groups=4)
        ds = create_sr(SRKind.COMPREHENSIVE_3D, ct_series, tree)
        doc = open_sr(ds)
        via_filter = doc.measurement_groups()
        via_find = doc.tree.find(name=DCM.MeasurementGroup)
        assert len(via_filter) == len(via_find) == 4
        assert [g.container for g in via_filter] == via_find


class TestGeometry:
    def test_planar_polygon_geometry(self, ct_series):
        tree = nodule_report(ct_series)
        ds = create_sr(SRKind.COMPREHENSIVE_3D, ct_series, tree)
        [group] = open_sr(ds).measurement_groups()
        region = group.geometry()
        assert isinstance(region, WorldRegion)
        assert region.points.shape == (5, 3)
        assert np.array_equal(region.points[0], region.points[-1])
        assert region.frame_of_reference_uid == ct_series[0].value("FrameOfReferenceUID")

    def test_segment_reference_geometry(self, ct_series):
        seg_uid = new_uid()
        seg_stub = DataSet()
        seg_stub.put("SOPClassUID", "1.2.840.10008.5.1.4.1.1.66.4")
        seg_stub.put("SOPInstanceUID", seg_uid)
        seg_stub.put("StudyInstanceUID", ct_series[0].value("StudyInstanceUID"))
        seg_stub.put("SeriesInstanceUID", new_uid())
        group = volumetric_roi_group(
            TrackingIdentifier.generate(),
            SegmentReference(seg_uid, 2),
            SCT.Nodule,
        )
        tree = measurement_report(OBSERVER, SCT.ImagingProcedure, [group])
        ds = create_sr(SRKind.COMPREHENSIVE_3D, [*ct_series, seg_stub], tree)
        [view] = open_sr(ds).measurement_groups()
        region = view.geometry()
        assert region == SegmentRegion(seg_uid, 2, "1.2.840.10008.5.1.4.1.1.66.4")
        assert view.kind is GroupKind.VOLUMETRIC

    def test_image_level_group_has_no_geometry(self, ct_series):
        group = measurement_group(
            TrackingIdentifier.generate(), SCT.Neoplasm,
        )
        tree = measurement_report(OBSERVER, SCT.ImagingProcedure, [group])
        ds = create_sr(SRKind.COMPREHENSIVE_3D, ct_series, tree)
        [view] = open_sr(ds).measurement_groups()
        assert view.kind is GroupKind.IMAGE
        with pytest.raises(NoGeometryError):
            view.geometry()

    def test_planar_scoord_pixel_geometry(self, ct_series):
        source = ct_series[0]
        scoord = ScoordItem(
            None, "POLYLINE", [(0, 0), (4, 4)],
            children=[ImageItem(
                None, source.value("SOPClassUID"), source.value("SOPInstanceUID"),
                relationship=RelationshipType.SELECTED_FROM,
            )],
        )
        group = planar_roi_group(
            TrackingIdentifier.generate(), scoord, SCT.Neoplasm
        )
        tree = measurement_report(OBSERVER, SCT.ImagingProcedure, [group])
        ds = create_sr(SRKind.COMPREHENSIVE, ct_series, tree)
        [view] = open_sr(ds).measurement_groups()
        region = view.geometry()
        assert region.points.shape == (2, 2)
        assert region.source.sop_instance_uid == source.value("SOPInstanceUID")
