"""Element-stream codec: implicit/explicit VR little endian (PS3.5 subset).

Reading accepts implicit and explicit VR little endian, with defined- and
undefined-length sequences. Writing emits explicit VR little endian only,
with defined-length sequences and even value lengths, so output is
canonical and byte-stable under re-encoding.
"""
from __future__ import annotations

import struct

from .dataset import DataElement, DataSet
from .errors import DecodeError, EncodeError, UnsupportedTransferSyntaxError
from .tags import (
    ITEM_DELIMITER_TAG,
    ITEM_TAG,
    SEQUENCE_DELIMITER_TAG,
    Tag,
    vr_of,
)
from .uid import (
    EXPLICIT_VR_LITTLE_ENDIAN,
    IMPLICIT_VR_LITTLE_ENDIAN,
    READ_TRANSFER_SYNTAXES,
)
from .valuerep import (
    BYTES_VRS,
    FLOAT_FORMATS,
    INT_FORMATS,
    LONG_FORM_VRS,
    MAX_VALUE_LENGTH,
    TEXT_MULTI_VRS,
    TEXT_SINGLE_VRS,
    VR,
    padding_byte,
)

UNDEFINED_LENGTH = 0xFFFFFFFF

_VR_CODES = {vr.value for vr in VR}


class _Reader:
    """Cursor over an element stream that reports absolute byte offsets."""

    __slots__ = ("data", "pos")

    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def eof(self, end: int | None = None) -> bool:
        limit = len(self.data) if end is None else end
        return self.pos >= limit

    def read(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise DecodeError(
                f"truncated stream: needed {n} bytes, "
                f"{len(self.data) - self.pos} remain",
                offset=self.pos,
            )
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u16(self) -> int:
        return struct.unpack("<H", self.read(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.read(4))[0]

    def tag(self) -> Tag:
        group = self.u16()
        element = self.u16()
        return Tag(group, element)


def _parse_text(vr: VR, data: bytes, offset: int):
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DecodeError(f"invalid UTF-8 in {vr} value: {exc}", offset=offset)
    if vr in TEXT_SINGLE_VRS:
        return text.rstrip(" \x00") if text else ""
    if vr is VR.UI:
        text = text.rstrip("\x00")
    else:
        text = text.rstrip(" ")
    if not text:
        return ()
    parts = text.split("\\")
    if vr is VR.DS:
        return tuple(p.strip() for p in parts)
    return tuple(parts)


def _parse_value(vr: VR, data: bytes, offset: int):
    if vr in BYTES_VRS:
        return data
    if vr is VR.IS:
        text = data.decode("ascii", errors="replace").strip(" \x00")
        if not text:
            return ()
        try:
            return tuple(int(p.strip()) for p in text.split("\\"))
        except ValueError as exc:
            raise DecodeError(f"bad IS value {text!r}: {exc}", offset=offset)
    if vr in TEXT_MULTI_VRS or vr in TEXT_SINGLE_VRS:
        return _parse_text(vr, data, offset)
    if vr in INT_FORMATS:
        fmt = INT_FORMATS[vr]
        width = struct.calcsize(fmt)
        if len(data) % width:
            raise DecodeError(f"{vr} value length not a multiple of {width}", offset=offset)
        return tuple(
            struct.unpack(fmt, data[i:i + width])[0]
            for i in range(0, len(data), width)
        )
    if vr in FLOAT_FORMATS:
        fmt = FLOAT_FORMATS[vr]
        width = struct.calcsize(fmt)
        if len(data) % width:
            raise DecodeError(f"{vr} value length not a multiple of {width}", offset=offset)
        return tuple(
            struct.unpack(fmt, data[i:i + width])[0]
            for i in range(0, len(data), width)
        )
    if vr is VR.AT:
        if len(data) % 4:
            raise DecodeError("AT value length not a multiple of 4", offset=offset)
        return tuple(
            Tag(*struct.unpack("<HH", data[i:i + 4]))
            for i in range(0, len(data), 4)
        )
    raise DecodeError(f"cannot parse VR {vr}", offset=offset)


def _raw_element(tag: Tag, vr: VR, value) -> DataElement:
    """Build an element from already-parsed values, bypassing normalization
    checks that decoded streams are allowed to violate (e.g. DS length)."""
    element = DataElement.__new__(DataElement)
    element.tag = tag
    element.vr = vr
    element._value = value
    return element


def _read_sequence_items(reader: _Reader, implicit: bool, end: int | None) -> tuple:
    items = []
    while True:
        if end is not None:
            if reader.pos >= end:
                break
        elif reader.eof():
            raise DecodeError("unterminated undefined-length sequence", offset=reader.pos)
        at = reader.pos
        tag = reader.tag()
        length = reader.u32()
        if tag == SEQUENCE_DELIMITER_TAG:
            if end is not None:
                raise DecodeError(
                    "sequence delimiter inside defined-length sequence", offset=at
                )
            break
        if tag != ITEM_TAG:
            raise DecodeError(f"expected sequence item, found {tag}", offset=at)
        if length == UNDEFINED_LENGTH:
            items.append(_read_dataset(reader, implicit, end=None, in_item=True))
        else:
            item_end = reader.pos + length
            if item_end > len(reader.data):
                raise DecodeError("item length overruns stream", offset=at)
            items.append(_read_dataset(reader, implicit, end=item_end, in_item=False))
    return tuple(items)


def _read_element(reader: _Reader, implicit: bool) -> DataElement:
    start = reader.pos
    tag = reader.tag()
    if tag in (ITEM_TAG, ITEM_DELIMITER_TAG, SEQUENCE_DELIMITER_TAG):
        raise DecodeError(f"unexpected delimiter {tag} outside a sequence", offset=start)
    if implicit:
        vr = vr_of(tag)
        length = reader.u32()
    else:
        vr_code = reader.read(2)
        try:
            code = vr_code.decode("ascii")
        except UnicodeDecodeError:
            code = ""
        if code not in _VR_CODES:
            raise DecodeError(f"unknown VR {vr_code!r} for {tag}", offset=start)
        vr = VR(code)
        if vr in LONG_FORM_VRS:
            reader.read(2)  # reserved
            length = reader.u32()
        else:
            length = reader.u16()

    if vr is VR.SQ:
        if length == UNDEFINED_LENGTH:
            items = _read_sequence_items(reader, implicit, end=None)
        else:
            end = reader.pos + length
            if end > len(reader.data):
                raise DecodeError(f"sequence length overruns stream for {tag}", offset=start)
            items = _read_sequence_items(reader, implicit, end=end)
            if reader.pos != end:
                raise DecodeError(f"sequence items overran declared length for {tag}", offset=start)
        return _raw_element(tag, VR.SQ, items)

    if length == UNDEFINED_LENGTH:
        raise DecodeError(f"undefined length on non-sequence element {tag}", offset=start)
    data = reader.read(length)
    return _raw_element(tag, vr, _parse_value(vr, data, start))


def _read_dataset(
    reader: _Reader, implicit: bool, end: int | None, in_item: bool
) -> DataSet:
    ds = DataSet()
    while True:
        if end is not None:
            if reader.pos > end:
                raise DecodeError("element overran enclosing length", offset=reader.pos)
            if reader.pos == end:
                break
        elif reader.eof():
            if in_item:
                raise DecodeError("unterminated undefined-length item", offset=reader.pos)
            break
        if in_item:
            peek = reader.pos
            tag = reader.tag()
            length = reader.u32()
            if tag == ITEM_DELIMITER_TAG:
                break
            reader.pos = peek
        ds.add(_read_element(reader, implicit))
    return ds


def decode_dataset(data: bytes, syntax: str = EXPLICIT_VR_LITTLE_ENDIAN) -> DataSet:
    """Decode a full element stream in the named transfer syntax.

    Raises
    ------
    UnsupportedTransferSyntaxError
        For syntaxes outside the supported read set.
    DecodeError
        On truncated streams, length overruns, or undefined-length
        non-sequence elements; the message carries the byte offset.
    """
    if syntax not in READ_TRANSFER_SYNTAXES:
        raise UnsupportedTransferSyntaxError(f"unsupported transfer syntax {syntax}")
    reader = _Reader(bytes(data))
    implicit = syntax == IMPLICIT_VR_LITTLE_ENDIAN
    return _read_dataset(reader, implicit, end=None, in_item=False)


# -- encoding ---------------------------------------------------------------


def _encode_text(element: DataElement) -> bytes:
    vr = element.vr
    if vr in TEXT_SINGLE_VRS:
        text = element.raw
    else:
        text = "\\".join(element.raw)
    data = text.encode("utf-8")
    limit = MAX_VALUE_LENGTH.get(vr)
    if limit is not None:
        parts = [element.raw] if vr in TEXT_SINGLE_VRS else element.raw
        for part in parts:
            if len(str(part).encode("utf-8")) > limit:
                raise EncodeError(
                    f"{element.tag}: {vr} value exceeds {limit} bytes: {part!r}"
                )
    if len(data) % 2:
        data += padding_byte(vr)
    return data


def _encode_value(element: DataElement) -> bytes:
    vr = element.vr
    if vr in BYTES_VRS:
        data = element.raw  # padded even at construction,
        if len(data) % 2:   # but decoded foreign values may arrive odd
            data += b"\x00"
        return data
    if vr is VR.IS:
        for v in element.raw:
            if len(str(v)) > 12:
                raise EncodeError(f"{element.tag}: IS value {v} exceeds 12 characters")
        data = "\\".join(str(v) for v in element.raw).encode("ascii")
        if len(data) % 2:
            data += b" "
        return data
    if vr in TEXT_MULTI_VRS or vr in TEXT_SINGLE_VRS:
        return _encode_text(element)
    if vr in INT_FORMATS:
        fmt = INT_FORMATS[vr]
        try:
            return b"".join(struct.pack(fmt, v) for v in element.raw)
        except struct.error as exc:
            raise EncodeError(f"{element.tag}: {vr} value out of range: {exc}")
    if vr in FLOAT_FORMATS:
        fmt = FLOAT_FORMATS[vr]
        return b"".join(struct.pack(fmt, v) for v in element.raw)
    if vr is VR.AT:
        return b"".join(struct.pack("<HH", t.group, t.element) for t in element.raw)
    raise EncodeError(f"{element.tag}: cannot encode VR {vr}")


def _encode_element(element: DataElement) -> bytes:
    tag_bytes = struct.pack("<HH", element.tag.group, element.tag.element)
    vr = element.vr
    if vr is VR.SQ:
        body = b"".join(
            struct.pack("<HHI", ITEM_TAG.group, ITEM_TAG.element, len(item_bytes))
            + item_bytes
            for item_bytes in (encode_dataset(item) for item in element.values)
        )
        return tag_bytes + b"SQ\x00\x00" + struct.pack("<I", len(body)) + body
    body = _encode_value(element)
    if vr in LONG_FORM_VRS:
        if len(body) > 0xFFFFFFFE:
            raise EncodeError(f"{element.tag}: value too large to encode")
        return tag_bytes + vr.value.encode("ascii") + b"\x00\x00" + struct.pack("<I", len(body)) + body
    if len(body) > 0xFFFF:
        raise EncodeError(
            f"{element.tag}: {vr} value of {len(body)} bytes exceeds the "
            "16-bit length field"
        )
    return tag_bytes + vr.value.encode("ascii") + struct.pack("<H", len(body)) + body


def encode_dataset(ds: DataSet, syntax: str = EXPLICIT_VR_LITTLE_ENDIAN) -> bytes:
    """Encode `ds` as an explicit VR little endian element stream.

    Sequences are written with defined lengths and every value length is
    even, so the output decodes back to an equal data set.
    """
    if syntax != EXPLICIT_VR_LITTLE_ENDIAN:
        raise UnsupportedTransferSyntaxError(
            f"write is supported only in explicit VR little endian, not {syntax}"
        )
    return b"".join(_encode_element(element) for element in ds)
