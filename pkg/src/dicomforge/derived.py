"""Helpers shared by all derived-object constructors (SEG and SR).

Derived objects never ask the caller for patient/study context: it is
copied verbatim from the source instances supplied as evidence, and the
sources are recorded in reference sequences grouped by study and series.
"""
from __future__ import annotations

import datetime

from .dataset import DataSet, copy_attributes
from .errors import EvidenceError

# Patient/study (and specimen, when present) attributes copied verbatim
# from evidence into every derived object.
PATIENT_STUDY_KEYS = (
    "PatientName",
    "PatientID",
    "PatientBirthDate",
    "PatientSex",
    "StudyInstanceUID",
    "StudyID",
    "StudyDate",
    "StudyTime",
    "AccessionNumber",
    "ReferringPhysicianName",
    "SpecimenDescriptionSequence",
    "ContainerIdentifier",
)


def check_evidence(evidence) -> list[DataSet]:
    """Common preconditions: non-empty, identified, single study."""
    evidence = list(evidence)
    if not evidence:
        raise EvidenceError("at least one evidence instance is required")
    studies = set()
    for ds in evidence:
        study = ds.value("StudyInstanceUID")
        if not study:
            raise EvidenceError("evidence instance lacks a StudyInstanceUID")
        if not ds.value("SOPInstanceUID") or not ds.value("SOPClassUID"):
            raise EvidenceError("evidence instance lacks SOP class/instance UIDs")
        studies.add(study)
    if len(studies) > 1:
        raise EvidenceError(
            f"evidence spans {len(studies)} studies; a derived object "
            "references exactly one"
        )
    return evidence


def copy_patient_study(source: DataSet, target: DataSet) -> None:
    copy_attributes(source, target, PATIENT_STUDY_KEYS)


def group_by_series(evidence) -> dict[str, list[DataSet]]:
    """Series UID -> instances, preserving first-seen series order."""
    by_series: dict[str, list[DataSet]] = {}
    for ds in evidence:
        by_series.setdefault(ds.value("SeriesInstanceUID", ""), []).append(ds)
    return by_series


def referenced_series_sequence(evidence) -> tuple[DataSet, ...]:
    """Common-instance-reference style: per series, the instances used."""
    items = []
    for series_uid, instances in group_by_series(evidence).items():
        refs = []
        for ds in instances:
            ref = DataSet()
            ref.put("ReferencedSOPClassUID", ds.value("SOPClassUID"))
            ref.put("ReferencedSOPInstanceUID", ds.value("SOPInstanceUID"))
            refs.append(ref)
        series_item = DataSet()
        series_item.put("SeriesInstanceUID", series_uid)
        series_item.put("ReferencedInstanceSequence", tuple(refs))
        items.append(series_item)
    return tuple(items)


def evidence_sequence(evidence) -> tuple[DataSet, ...]:
    """Hierarchical evidence: one study item holding per-series references."""
    study_uid = evidence[0].value("StudyInstanceUID")
    series_items = []
    for series_uid, instances in group_by_series(evidence).items():
        refs = []
        for ds in instances:
            ref = DataSet()
            ref.put("ReferencedSOPClassUID", ds.value("SOPClassUID"))
            ref.put("ReferencedSOPInstanceUID", ds.value("SOPInstanceUID"))
            refs.append(ref)
        series_item = DataSet()
        series_item.put("SeriesInstanceUID", series_uid)
        series_item.put("ReferencedSOPSequence", tuple(refs))
        series_items.append(series_item)
    study_item = DataSet()
    study_item.put("StudyInstanceUID", study_uid)
    study_item.put("ReferencedSeriesSequence", tuple(series_items))
    return (study_item,)


def content_timestamp(target: DataSet) -> None:
    now = datetime.datetime.now()
    target.put("ContentDate", now.strftime("%Y%m%d"))
    target.put("ContentTime", now.strftime("%H%M%S"))
