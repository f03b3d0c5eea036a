"errors.py: exception types raised by pdecode"
# Copyright (C) 2026 pdecode contributors
#
# SPDX-License-Identifier: GPL-3.0-or-later


class PdecodeError(ValueError):
    """ Base class for every error pdecode raises on bad input """


class ParityCheckFormatError(PdecodeError):
    """ A parity-check file is malformed or describes a degenerate matrix """


class CodebookTooLarge(PdecodeError):
    """ Enumerating the codebook would exceed the configured cap """


class DimensionError(PdecodeError):
    """ Vector length does not match the matrix, grid or layout """


class StabilityError(PdecodeError):
    """ Grid parameters are invalid or the explicit scheme would be unstable """


class LayoutError(PdecodeError):
    """ Pulse or sensor placement does not fit the grid """


class ConfigError(PdecodeError):
    """ Configuration failed validation. `field` names the offending key """
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
