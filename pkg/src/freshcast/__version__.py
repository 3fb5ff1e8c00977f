"""Freshcast version information.

"""

MAJOR_VERSION = 0
MINOR_VERSION = 3
PATCH_VERSION = 0
VERSION = f"{MAJOR_VERSION}.{MINOR_VERSION}.{PATCH_VERSION}"
