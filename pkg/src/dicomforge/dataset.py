"""In-memory model of DICOM data sets.

A :class:`DataSet` is an ordered tag -> :class:`DataElement` container; the
element value is normalized at construction into one of a small set of
Python shapes (tuples of str/int/float, bytes, nested data sets) so that
``decode(encode(ds)) == ds`` holds element-wise. Instances are treated as
immutable once construction is finished; nothing in this package mutates a
data set it did not just build.
"""
from __future__ import annotations

from collections.abc import Iterable, Iterator
from typing import Any

from .tags import Tag, TagKey, keyword_of, resolve_key, vr_of
from .valuerep import (
    BYTES_VRS,
    FLOAT_FORMATS,
    INT_FORMATS,
    TEXT_MULTI_VRS,
    TEXT_SINGLE_VRS,
    VR,
    float32_round_trip,
    format_ds,
    is_valid_ds,
)


def _as_tuple(value: Any) -> tuple:
    if value is None:
        return ()
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return (value,)


def _normalize(tag: Tag, vr: VR, value: Any):
    """Coerce `value` into the canonical in-memory shape for `vr`."""
    if vr is VR.SQ:
        items = _as_tuple(value)
        for item in items:
            if not isinstance(item, DataSet):
                raise TypeError(f"{tag}: sequence items must be DataSet")
        return items
    if vr in BYTES_VRS:
        if value is None:
            value = b""
        if not isinstance(value, (bytes, bytearray, memoryview)):
            raise TypeError(f"{tag}: VR {vr} requires bytes")
        data = bytes(value)
        if len(data) % 2:
            data += b"\x00"  # construction-time padding keeps round trips exact
        return data
    if vr in TEXT_SINGLE_VRS:
        if value is None:
            return ""
        if not isinstance(value, str):
            raise TypeError(f"{tag}: VR {vr} requires str")
        return value
    if vr is VR.DS:
        parts = []
        for v in _as_tuple(value):
            if isinstance(v, str):
                v = v.strip()
                if not is_valid_ds(v):
                    raise ValueError(f"{tag}: {v!r} is not a valid decimal string")
                parts.append(v)
            else:
                parts.append(format_ds(v))
        return tuple(parts)
    if vr in TEXT_MULTI_VRS:
        parts = _as_tuple(value)
        out = []
        for v in parts:
            if not isinstance(v, str):
                raise TypeError(f"{tag}: VR {vr} requires str values")
            if "\\" in v:
                raise ValueError(f"{tag}: backslash not allowed inside a {vr} value")
            out.append(v)
        if out == [""]:
            return ()
        return tuple(out)
    if vr is VR.IS or vr in INT_FORMATS:
        return tuple(int(v) for v in _as_tuple(value))
    if vr in FLOAT_FORMATS:
        values = tuple(float(v) for v in _as_tuple(value))
        if vr is VR.FL:
            values = tuple(float32_round_trip(v) for v in values)
        return values
    if vr is VR.AT:
        out = []
        for v in _as_tuple(value):
            if isinstance(v, Tag):
                out.append(v)
            elif isinstance(v, tuple) and len(v) == 2:
                out.append(Tag(*v))
            else:
                raise TypeError(f"{tag}: VR AT requires Tag values")
        return tuple(out)
    raise ValueError(f"{tag}: unhandled VR {vr}")


class DataElement:
    """One tag/VR/value triple."""

    __slots__ = ("tag", "vr", "_value")

    def __init__(self, tag: Tag, vr: VR, value: Any = None):
        self.tag = tag
        self.vr = VR(vr)
        self._value = _normalize(tag, self.vr, value)

    @property
    def values(self) -> tuple:
        """All values as a tuple; bytes and single-text values wrapped."""
        if isinstance(self._value, tuple):
            return self._value
        return (self._value,)

    @property
    def value(self):
        """The single value: first entry for multi-valued VRs, None if empty."""
        if isinstance(self._value, tuple):
            return self._value[0] if self._value else None
        return self._value

    @property
    def raw(self):
        return self._value

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DataElement)
            and self.tag == other.tag
            and self.vr == other.vr
            and self._value == other._value
        )

    def __hash__(self):
        raise TypeError("DataElement is not hashable")

    def __repr__(self) -> str:
        kw = keyword_of(self.tag)
        label = f" {kw}" if kw else ""
        if self.vr is VR.SQ:
            summary = f"<{len(self.values)} item(s)>"
        elif isinstance(self._value, bytes):
            summary = f"<{len(self._value)} bytes>"
        else:
            summary = repr(self._value)
        return f"{self.tag} {self.vr}{label}: {summary}"


class DataSet:
    """Ordered collection of data elements, at most one per tag.

    Iteration and encoding always proceed in ascending tag order regardless
    of insertion order.
    """

    __slots__ = ("_elements",)

    def __init__(self, elements: Iterable[DataElement] = ()):
        self._elements: dict[Tag, DataElement] = {}
        for element in elements:
            self.add(element)

    # -- construction -----------------------------------------------------

    def add(self, element: DataElement) -> None:
        self._elements[element.tag] = element

    def put(self, key: TagKey, value: Any, vr: VR | str | None = None) -> None:
        """Set an element, taking the VR from the dictionary when omitted."""
        tag = resolve_key(key)
        if vr is None:
            vr = vr_of(tag)
            if vr is VR.UN and not isinstance(value, (bytes, bytearray)):
                raise ValueError(f"{tag}: VR required for tags outside the dictionary")
        self.add(DataElement(tag, VR(vr), value))

    def remove(self, key: TagKey) -> None:
        self._elements.pop(resolve_key(key), None)

    # -- access ------------------------------------------------------------

    def element(self, key: TagKey) -> DataElement | None:
        return self._elements.get(resolve_key(key))

    def __getitem__(self, key: TagKey) -> DataElement:
        tag = resolve_key(key)
        try:
            return self._elements[tag]
        except KeyError:
            raise KeyError(f"no element {tag}") from None

    def __contains__(self, key: TagKey) -> bool:
        try:
            return resolve_key(key) in self._elements
        except KeyError:
            return False

    def value(self, key: TagKey, default: Any = None) -> Any:
        element = self.element(key)
        if element is None:
            return default
        value = element.value
        return default if value is None else value

    def values(self, key: TagKey) -> tuple:
        element = self.element(key)
        return element.values if element is not None else ()

    def floats(self, key: TagKey) -> tuple[float, ...]:
        """Values of a numeric-string element (DS/IS) converted to float."""
        return tuple(float(v) for v in self.values(key))

    def items_of(self, key: TagKey) -> tuple["DataSet", ...]:
        """Items of a sequence element; empty tuple when absent."""
        element = self.element(key)
        if element is None:
            return ()
        if element.vr is not VR.SQ:
            raise TypeError(f"{element.tag} is {element.vr}, not a sequence")
        return element.values

    # -- iteration / comparison --------------------------------------------

    def tags(self) -> list[Tag]:
        return sorted(self._elements)

    def __iter__(self) -> Iterator[DataElement]:
        for tag in sorted(self._elements):
            yield self._elements[tag]

    def __len__(self) -> int:
        return len(self._elements)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DataSet):
            return NotImplemented
        if set(self._elements) != set(other._elements):
            return False
        return all(self._elements[t] == other._elements[t] for t in self._elements)

    def __hash__(self):
        raise TypeError("DataSet is not hashable")

    def __repr__(self) -> str:
        return f"DataSet({len(self)} elements)"

    def format(self, indent: int = 0) -> str:
        """Multi-line human-readable dump, nested sequences indented."""
        lines = []
        pad = "  " * indent
        for element in self:
            lines.append(pad + repr(element))
            if element.vr is VR.SQ:
                for i, item in enumerate(element.values):
                    lines.append(f"{pad}  item {i + 1}:")
                    lines.append(item.format(indent + 2))
        return "\n".join(lines)


def copy_attributes(source: DataSet, target: DataSet, keys: Iterable[TagKey]) -> None:
    """Copy the listed elements from `source` into `target` when present."""
    for key in keys:
        element = source.element(key)
        if element is not None:
            target.add(element)
