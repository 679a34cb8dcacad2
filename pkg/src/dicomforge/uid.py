"""Unique identifiers: generation and the well-known UIDs this package uses."""
import re
import secrets

# Transfer syntaxes
IMPLICIT_VR_LITTLE_ENDIAN = "1.2.840.10008.1.2"
EXPLICIT_VR_LITTLE_ENDIAN = "1.2.840.10008.1.2.1"

READ_TRANSFER_SYNTAXES = frozenset({
    IMPLICIT_VR_LITTLE_ENDIAN,
    EXPLICIT_VR_LITTLE_ENDIAN,
})
WRITE_TRANSFER_SYNTAXES = frozenset({EXPLICIT_VR_LITTLE_ENDIAN})

# Storage SOP classes
SEGMENTATION_STORAGE = "1.2.840.10008.5.1.4.1.1.66.4"
COMPREHENSIVE_SR_STORAGE = "1.2.840.10008.5.1.4.1.1.88.33"
COMPREHENSIVE_3D_SR_STORAGE = "1.2.840.10008.5.1.4.1.1.88.34"
CT_IMAGE_STORAGE = "1.2.840.10008.5.1.4.1.1.2"
VL_WHOLE_SLIDE_MICROSCOPY_IMAGE_STORAGE = "1.2.840.10008.5.1.4.1.1.77.1.6"

# Identity of this implementation, written into file meta of created files.
IMPLEMENTATION_CLASS_UID = "2.25.31415926535897932384626433832795028"
IMPLEMENTATION_VERSION_NAME = "DCMFORGE-0.1.0"

_UID_RE = re.compile(r"^[0-9]+(\.[0-9]+)*$")


def new_uid() -> str:
    """Return a fresh UID: ``2.25.`` + decimal rendering of 128 random bits."""
    return f"2.25.{secrets.randbits(128)}"


def is_valid_uid(value: str) -> bool:
    """True if `value` is digits-and-dots, non-empty, at most 64 characters."""
    return bool(value) and len(value) <= 64 and _UID_RE.match(value) is not None
