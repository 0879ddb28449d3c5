"""Exception hierarchy. Each class carries a short ``category`` used by the CLI."""


class RagftError(Exception):
    category = "error"


class PlyFormatError(RagftError, ValueError):
    category = "ply-format"


class MissingColorError(PlyFormatError):
    category = "missing-color"


class EmptyCloudError(RagftError, ValueError):
    category = "empty-cloud"


class ScheduleError(RagftError, ValueError):
    category = "schedule"


class BlockTransformError(RagftError):
    category = "eigensolver"


class BitstreamError(RagftError, ValueError):
    category = "bitstream"


class TruncatedStreamError(BitstreamError):
    category = "truncated-stream"


class CountMismatchError(RagftError, ValueError):
    category = "count-mismatch"
