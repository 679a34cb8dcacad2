"""Command-line surface: validate, inspect, create, convert, exchange.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 I/O error,
4 network error. Failures print one machine-parsable line to stderr:
``ERROR <category>: <detail>``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .coding import REGISTRIES, SCT, UCUM, CodedConcept
from .dataset import DataSet
from .errors import (
    DicomforgeError,
    ProtocolError,
    ServerStartupError,
    TransportError,
)
from .part10 import read_part10_file, write_part10_file
from .pgm import read_pgm, write_pgm
from .roi import bounding_boxes, connected_components
from .seg import (
    AlgorithmType,
    SegmentDescription,
    SegmentationType,
    create_seg,
    open_seg,
)
from .spatial import PlaneGeometry, mapper_from_geometry
from .sr import (
    CodeItem,
    ContainerItem,
    ImageItem,
    NumItem,
    ObserverContext,
    RelationshipType,
    ScoordItem,
    Scoord3DItem,
    SegmentReference,
    SRKind,
    TrackingIdentifier,
    ValueType,
    create_sr,
    measurement_group,
    measurement_report,
    open_sr,
    planar_roi_group,
    volumetric_roi_group,
)
from .sr.items import AlgorithmIdentification
from .uid import COMPREHENSIVE_3D_SR_STORAGE, COMPREHENSIVE_SR_STORAGE, SEGMENTATION_STORAGE
from .web import StubArchive, WebClient
from .web.jsonmodel import dataset_to_json

TOKEN_ENV_VAR = "DICOMFORGE_TOKEN"


def _parse_code(text: str) -> CodedConcept:
    """SCHEME:VALUE[:MEANING]; registry supplies the meaning when omitted."""
    parts = text.split(":", 2)
    if len(parts) < 2 or not parts[0] or not parts[1]:
        raise DicomforgeError(f"code must be SCHEME:VALUE[:MEANING], got {text!r}")
    scheme, value = parts[0], parts[1]
    if len(parts) == 3:
        return CodedConcept(value, scheme, parts[2])
    registry = REGISTRIES.get(scheme)
    if registry is not None:
        try:
            return registry.get(value)
        except DicomforgeError:
            pass
    return CodedConcept(value, scheme, value)


def _parse_unit(text: str) -> CodedConcept:
    try:
        return UCUM.get(text)
    except DicomforgeError:
        return CodedConcept(text, "UCUM", text)


# -- validate ------------------------------------------------------------------


def cmd_validate(args) -> int:
    _, ds = read_part10_file(args.file)
    sop_class = ds.value("SOPClassUID", "")
    if not sop_class or not ds.value("SOPInstanceUID"):
        raise DicomforgeError("dataset lacks SOP class/instance UIDs")
    if sop_class == SEGMENTATION_STORAGE:
        seg = open_seg(ds)
        kind = f"SEG ({seg.seg_type.kind}, {len(seg.descriptions)} segment(s))"
    elif sop_class in (COMPREHENSIVE_SR_STORAGE, COMPREHENSIVE_3D_SR_STORAGE):
        doc = open_sr(ds)
        kind = f"SR ({doc.kind.name}, {len(doc.measurement_groups())} group(s))"
    else:
        kind = ds.value("Modality", "unknown modality")
    print(f"OK {args.file}: {kind}")
    return 0


# -- dump-sr -------------------------------------------------------------------


def _item_summary(item) -> str:
    if item.value_type is ValueType.CONTAINER:
        suffix = f" [TID {item.template_id}]" if item.template_id else ""
        return f"({item.continuity.value}){suffix}"
    if item.value_type is ValueType.CODE:
        return f"= {item.value.meaning} ({item.value.scheme} {item.value.value})"
    if item.value_type is ValueType.NUM:
        return f"= {item.value} {item.unit.value}"
    if item.value_type in (ValueType.TEXT, ValueType.UIDREF, ValueType.PNAME,
                           ValueType.DATETIME):
        return f"= {item.value}"
    if item.value_type is ValueType.IMAGE:
        segment = f" segment {item.segment_number}" if item.segment_number else ""
        return f"-> {item.sop_instance_uid}{segment}"
    if item.value_type is ValueType.COMPOSITE:
        return f"-> {item.sop_instance_uid}"
    return f"{item.graphic_type.value} ({len(item.points)} point(s))"


def _dump_item(item, depth: int) -> None:
    indent = "  " * depth
    rel = f"{item.relationship.value} " if item.relationship else ""
    name = item.name.meaning if item.name else "(unnamed)"
    print(f"{indent}{rel}{item.value_type.value} {name}: {_item_summary(item)}")
    for child in item.children:
        _dump_item(child, depth + 1)


def cmd_dump_sr(args) -> int:
    _, ds = read_part10_file(args.file)
    doc = open_sr(ds)
    _dump_item(doc.tree, 0)
    return 0


# -- mk-seg --------------------------------------------------------------------


def cmd_mk_seg(args) -> int:
    sources = [read_part10_file(path)[1] for path in args.source]
    masks = [read_pgm(path) for path in args.mask]
    if len(masks) != len(sources):
        raise DicomforgeError(
            f"{len(masks)} mask(s) for {len(sources)} source frame(s); "
            "pass one --mask per source"
        )
    stack = np.stack(masks)
    if args.fractional:
        seg_type = SegmentationType.fractional(
            max_fractional_value=args.max_fractional
        )
        stack = stack / 255.0
    else:
        seg_type = SegmentationType.binary()
    name, _, version = (args.algorithm or f"dicomforge-cli:{__version__}").partition(":")
    description = SegmentDescription(
        number=1,
        label=args.label,
        category=_parse_code(args.category),
        property_type=_parse_code(args.type),
        algorithm_type=AlgorithmType.AUTOMATIC,
        algorithm=AlgorithmIdentification(name, version or "unknown"),
    )
    ds = create_seg(sources, [stack], [description], seg_type,
                    omit_empty=args.omit_empty)
    write_part10_file(args.output, ds)
    print(f"wrote {args.output}: {ds.value('NumberOfFrames')} frame(s)")
    return 0


# -- parse-seg -----------------------------------------------------------------


def cmd_parse_seg(args) -> int:
    _, ds = read_part10_file(args.file)
    seg = open_seg(ds)
    keys = seg.source_frame_keys()
    if not 1 <= args.frame <= len(keys):
        raise DicomforgeError(
            f"frame {args.frame} out of range 1..{len(keys)}"
        )
    segments = None
    if args.segments:
        segments = [int(s) for s in args.segments.split(",")]
    label_map = seg.label_map(keys[args.frame - 1], segments=segments)
    if label_map.max() > 255:
        raise DicomforgeError("label map has segment numbers above 255; PGM cannot hold them")
    write_pgm(args.output, label_map.astype(np.uint8))
    print(f"wrote {args.output}")
    return 0


# -- mk-sr ---------------------------------------------------------------------


def _observer_from_spec(spec: dict) -> ObserverContext:
    kind = spec.get("type", "device")
    if kind == "person":
        if "name" not in spec:
            raise DicomforgeError("observer.name is required for a person observer")
        return ObserverContext.person(spec["name"])
    if kind == "device":
        if "name" not in spec:
            raise DicomforgeError("observer.name is required for a device observer")
        return ObserverContext.device(
            name=spec["name"],
            uid=spec.get("uid"),
            manufacturer=spec.get("manufacturer"),
            version=spec.get("version"),
        )
    raise DicomforgeError(f"observer.type must be person or device, got {kind!r}")


_REGION_3D_TYPES = {"point3d": "POINT", "polyline3d": "POLYLINE",
                    "polygon3d": "POLYGON", "multipoint3d": "MULTIPOINT"}
_REGION_2D_TYPES = {"point2d": "POINT", "polyline2d": "POLYLINE",
                    "circle2d": "CIRCLE", "ellipse2d": "ELLIPSE",
                    "multipoint2d": "MULTIPOINT"}


def _region_from_spec(region: dict, default_frame_uid: str | None):
    rtype = region.get("type")
    if rtype == "segment":
        return SegmentReference(
            sop_instance_uid=region["sop_instance_uid"],
            segment_number=int(region["segment_number"]),
        )
    if rtype in _REGION_3D_TYPES:
        frame_uid = region.get("frame_of_reference") or default_frame_uid
        if not frame_uid:
            raise DicomforgeError(
                "region needs a frame_of_reference (none found in evidence)"
            )
        return Scoord3DItem(None, _REGION_3D_TYPES[rtype], region["points"], frame_uid)
    if rtype in _REGION_2D_TYPES:
        image = region.get("image")
        if not image:
            raise DicomforgeError("a 2D region needs an image reference")
        source = ImageItem(
            None, image["sop_class_uid"], image["sop_instance_uid"],
            frame_numbers=image.get("frame_numbers"),
            relationship=RelationshipType.SELECTED_FROM,
        )
        return ScoordItem(None, _REGION_2D_TYPES[rtype], region["points"],
                          children=[source])
    raise DicomforgeError(f"unknown region type {rtype!r}")


def _group_from_spec(spec: dict, default_frame_uid: str | None) -> ContainerItem:
    for key in ("kind", "finding"):
        if key not in spec:
            raise DicomforgeError(f"group is missing required key {key!r}")
    tracking = TrackingIdentifier(
        uid=spec.get("tracking_uid") or TrackingIdentifier.generate().uid,
        identifier=spec.get("tracking_id"),
    )
    finding = _parse_code(spec["finding"])
    sites = [_parse_code(s) for s in spec.get("finding_sites", [])]
    measurements = [
        NumItem(_parse_code(m["code"]), str(m["value"]), _parse_unit(m["unit"]))
        for m in spec.get("measurements", [])
    ]
    evaluations = [
        CodeItem(_parse_code(e["code"]), _parse_code(e["value"]))
        for e in spec.get("evaluations", [])
    ]
    kind = spec["kind"]
    if kind == "image":
        return measurement_group(tracking, finding, measurements, evaluations)
    region_spec = spec.get("region")
    if region_spec is None:
        raise DicomforgeError(f"a {kind} group needs a region")
    if kind == "planar":
        region = _region_from_spec(region_spec, default_frame_uid)
        return planar_roi_group(tracking, region, finding, sites,
                                measurements, evaluations)
    if kind == "volumetric":
        if isinstance(region_spec, list):
            region = [_region_from_spec(r, default_frame_uid) for r in region_spec]
        else:
            region = _region_from_spec(region_spec, default_frame_uid)
        return volumetric_roi_group(tracking, region, finding, sites,
                                    measurements, evaluations)
    raise DicomforgeError(f"group.kind must be planar|volumetric|image, got {kind!r}")


def _sr_kind(text: str) -> SRKind:
    return {
        "comprehensive": SRKind.COMPREHENSIVE,
        "comprehensive3d": SRKind.COMPREHENSIVE_3D,
    }[text]


def cmd_mk_sr(args) -> int:
    if bool(args.spec) == bool(args.from_seg):
        raise DicomforgeError("exactly one of --spec and --from-seg is required")
    if args.spec:
        return _mk_sr_from_spec(args)
    return _mk_sr_from_seg(args)


def _mk_sr_from_spec(args) -> int:
    try:
        with open(args.spec, "r", encoding="utf-8") as handle:
            spec = json.load(handle)
    except json.JSONDecodeError as exc:
        raise DicomforgeError(f"annotation spec is not valid JSON: {exc}")
    for key in ("observer", "evidence", "groups"):
        if key not in spec:
            raise DicomforgeError(f"annotation spec is missing {key!r}")
    evidence = [read_part10_file(path)[1] for path in spec["evidence"]]
    default_frame_uid = evidence[0].value("FrameOfReferenceUID") if evidence else None
    observer = _observer_from_spec(spec["observer"])
    procedure = (
        _parse_code(spec["procedure"]) if "procedure" in spec
        else SCT.ImagingProcedure
    )
    groups = [_group_from_spec(g, default_frame_uid) for g in spec["groups"]]
    tree = measurement_report(observer, procedure, groups)
    ds = create_sr(_sr_kind(args.kind), evidence, tree)
    write_part10_file(args.output, ds)
    print(f"wrote {args.output}: {len(groups)} group(s)")
    return 0


def _mk_sr_from_seg(args) -> int:
    """Bounding-box SR from a SEG: threshold, components, boxes, 3D corners."""
    _, seg_ds = read_part10_file(args.from_seg)
    seg = open_seg(seg_ds)
    frame_uid = seg_ds.value("FrameOfReferenceUID")
    if not frame_uid:
        raise DicomforgeError("segmentation lacks a frame of reference UID")
    by_number = {d.number: d for d in seg.descriptions}
    groups = []
    for record in seg.frames:
        frame = seg.stored_frame(record.index)
        if seg.seg_type.is_binary:
            mask = (frame > 0).astype(np.uint8)
        else:
            mask = (
                frame / seg.seg_type.max_fractional_value >= args.threshold
            ).astype(np.uint8)
        components = connected_components(mask)
        if not components.count:
            continue
        mapper = mapper_from_geometry(seg.plane_geometry(record))
        description = by_number[record.segment_number]
        for box in bounding_boxes(components):
            corners = box.corner_points()
            closed = np.vstack([corners, corners[:1]])
            points_3d = mapper.pixel_to_reference(closed)
            region = Scoord3DItem(None, "POLYGON", points_3d, frame_uid)
            tracking = TrackingIdentifier.generate(
                f"{description.label} frame {record.index + 1} region {box.label}"
            )
            groups.append(planar_roi_group(
                tracking, region, description.property_type,
                finding_sites=[description.anatomic_site] if description.anatomic_site else (),
            ))
    if not groups:
        raise DicomforgeError(
            f"no regions found at threshold {args.threshold}; nothing to report"
        )
    observer = ObserverContext.device(
        name="dicomforge-from-seg", version=__version__
    )
    tree = measurement_report(observer, SCT.ImagingProcedure, groups)
    ds = create_sr(SRKind.COMPREHENSIVE_3D, [seg_ds], tree)
    write_part10_file(args.output, ds)
    print(f"wrote {args.output}: {len(groups)} group(s)")
    return 0


# -- coords --------------------------------------------------------------------


def _geometry_from_file(path) -> PlaneGeometry:
    values: dict[str, list[float]] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DicomforgeError(f"bad geometry line {line!r}; use key=v1,v2,...")
            key, _, value = line.partition("=")
            values[key.strip()] = [float(v) for v in value.split(",")]
    try:
        return PlaneGeometry(
            position=tuple(values["position"]),
            orientation=tuple(values["orientation"]),
            spacing=tuple(values["spacing"]),
        )
    except KeyError as exc:
        raise DicomforgeError(f"geometry file is missing {exc.args[0]!r}")


def cmd_coords(args) -> int:
    geometry = _geometry_from_file(args.geometry)
    mapper = mapper_from_geometry(geometry)
    if bool(args.to_ref) == bool(args.to_pixel):
        raise DicomforgeError("exactly one of --to-ref and --to-pixel is required")
    if args.to_ref:
        column, row = (float(v) for v in args.to_ref.split(","))
        x, y, z = mapper.pixel_to_reference((column, row))
        print(f"{x:.9g},{y:.9g},{z:.9g}")
    else:
        x, y, z = (float(v) for v in args.to_pixel.split(","))
        column, row = mapper.reference_to_pixel((x, y, z), tolerance=args.tolerance)
        print(f"{column:.9g},{row:.9g}")
    return 0


# -- DICOMweb ------------------------------------------------------------------


def _client(args) -> WebClient:
    token = args.token or os.environ.get(TOKEN_ENV_VAR)
    return WebClient(args.url, token=token)


def cmd_store(args) -> int:
    client = _client(args)
    blobs = []
    for path in args.file:
        with open(path, "rb") as handle:
            blobs.append(handle.read())
    response = client.store_parts(blobs)
    failed = [
        item.value("ReferencedSOPInstanceUID", "?")
        for item in response.items_of("FailedSOPSequence")
    ]
    for item in response.items_of("ReferencedSOPSequence"):
        print(f"stored {item.value('ReferencedSOPInstanceUID')}")
    if failed:
        raise TransportError(f"store failed for: {', '.join(failed)}", status=409)
    return 0


def cmd_retrieve(args) -> int:
    client = _client(args)
    blob = client.retrieve_instance_bytes(args.study, args.series, args.sop)
    with open(args.output, "wb") as handle:
        handle.write(blob)
    print(f"wrote {args.output}: {len(blob)} bytes")
    return 0


def cmd_search(args) -> int:
    client = _client(args)
    query = {}
    for item in args.filter or []:
        if "=" not in item:
            raise DicomforgeError(f"filters are KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        query[key] = value
    records = client.search(args.level, query, limit=args.limit, offset=args.offset)
    for record in records:
        print(json.dumps(dataset_to_json(record), sort_keys=True))
    return 0


def cmd_serve(args) -> int:
    archive = StubArchive(port=args.port, snapshot_dir=args.dir).start()
    print(f"stub archive listening on {archive.base_url}")
    try:
        import threading
        threading.Event().wait()
    except KeyboardInterrupt:
        pass
    finally:
        archive.stop()
    return 0


# -- plumbing ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dicomforge",
        description="Encode, decode and exchange derived DICOM objects.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a file's structure")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("dump-sr", help="print an SR content tree")
    p.add_argument("file")
    p.set_defaults(func=cmd_dump_sr)

    p = sub.add_parser("mk-seg", help="build a SEG from PGM masks")
    p.add_argument("--source", action="append", required=True,
                   help="source instance file (repeat per frame)")
    p.add_argument("--mask", action="append", required=True,
                   help="P5 PGM mask, one per source frame")
    p.add_argument("--label", required=True)
    p.add_argument("--category", required=True, metavar="SCHEME:CODE[:MEANING]")
    p.add_argument("--type", required=True, metavar="SCHEME:CODE[:MEANING]")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--binary", action="store_true", default=True)
    group.add_argument("--fractional", action="store_true")
    p.add_argument("--max-fractional", type=int, default=255)
    p.add_argument("--omit-empty", action="store_true")
    p.add_argument("--algorithm", metavar="NAME:VERSION")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_mk_seg)

    p = sub.add_parser("parse-seg", help="write a label map PGM for one frame")
    p.add_argument("file")
    p.add_argument("--frame", type=int, required=True,
                   help="1-based source frame index")
    p.add_argument("--segments", help="comma-separated subset of segment numbers")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_parse_seg)

    p = sub.add_parser("mk-sr", help="build an SR from a JSON spec or a SEG")
    p.add_argument("--spec", help="annotation spec (JSON)")
    p.add_argument("--from-seg", help="derive bounding-box SR from a SEG file")
    p.add_argument("--threshold", type=float, default=0.5,
                   help="probability threshold for fractional SEGs")
    p.add_argument("--kind", choices=["comprehensive", "comprehensive3d"],
                   default="comprehensive3d")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_mk_sr)

    p = sub.add_parser("coords", help="convert pixel <-> reference coordinates")
    p.add_argument("--geometry", required=True,
                   help="text file: position=..., orientation=..., spacing=...")
    p.add_argument("--to-ref", metavar="COL,ROW")
    p.add_argument("--to-pixel", metavar="X,Y,Z")
    p.add_argument("--tolerance", type=float, default=1e-3)
    p.set_defaults(func=cmd_coords)

    p = sub.add_parser("store", help="STOW-RS store files")
    p.add_argument("--url", required=True)
    p.add_argument("--token")
    p.add_argument("file", nargs="+")
    p.set_defaults(func=cmd_store)

    p = sub.add_parser("retrieve", help="WADO-RS retrieve one instance")
    p.add_argument("--url", required=True)
    p.add_argument("--token")
    p.add_argument("study")
    p.add_argument("series")
    p.add_argument("sop")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("search", help="QIDO-RS search")
    p.add_argument("--url", required=True)
    p.add_argument("--token")
    p.add_argument("--level", choices=["studies", "series", "instances"],
                   default="instances")
    p.add_argument("--filter", action="append", metavar="KEY=VALUE")
    p.add_argument("--limit", type=int)
    p.add_argument("--offset", type=int)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("serve", help="run the in-memory stub archive")
    p.add_argument("--port", type=int, default=8042)
    p.add_argument("--dir", help="snapshot directory for stored instances")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            return 0
        print("ERROR usage: invalid arguments", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (TransportError, ProtocolError, ServerStartupError) as exc:
        print(f"ERROR network: {exc}", file=sys.stderr)
        return 4
    except DicomforgeError as exc:
        print(f"ERROR validation: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"ERROR io: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, TypeError) as exc:
        print(f"ERROR usage: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
