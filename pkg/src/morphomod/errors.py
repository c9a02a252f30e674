"""Exception and warning types shared across the toolkit."""


class MorphoModError(Exception):
    """Base class for all toolkit errors."""


class PngFormatError(MorphoModError):
    """File is not a decodable PNG."""


class UnsupportedPngError(MorphoModError):
    """PNG variant (bit depth / pixel mode) outside the supported set."""


class DegenerateRegionError(MorphoModError):
    """An operation needed a nonempty pixel region and got none."""


class CoverageError(MorphoModError):
    """Requested watermark placement or coverage cannot be met."""


class UnknownBackendError(MorphoModError):
    """Backend id does not name a known inpainting backend."""


class PipelineStageError(MorphoModError):
    """A pipeline stage failed; carries the stage name, chains the cause."""

    def __init__(self, stage, message):
        super().__init__(f"{stage} stage failed: {message}")
        self.stage = stage


class RemoteBackendError(MorphoModError):
    """Base class for remote inpainting failures."""


class RemoteConnectionError(RemoteBackendError):
    """Endpoint unreachable."""


class RemoteStatusError(RemoteBackendError):
    """Endpoint answered with a non-200 status."""

    def __init__(self, status, detail=""):
        msg = f"remote returned HTTP {status}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.status = status
        self.detail = detail


class RemotePayloadError(RemoteBackendError):
    """Response body was not the expected JSON / base64-PNG payload."""


class RemoteDimensionError(RemoteBackendError):
    """Returned image dimensions differ from the request."""


class MorphoModWarning(UserWarning):
    """Base class for toolkit warnings."""


class DegenerateMaskWarning(MorphoModWarning):
    """A mask left an operation without usable data (e.g. covers everything)."""


class EmptyMaskWarning(MorphoModWarning):
    """Initial segmentation found nothing to remove."""


class ConvergenceWarning(MorphoModWarning):
    """Iterative solver hit its iteration cap before reaching tolerance."""
