"""Exception types shared across the toolkit."""


class ShipSegError(Exception):
    """Base class for all toolkit errors."""


class ParseError(ShipSegError):
    """Run-length text is malformed (odd token count or non-integer token)."""


class BoundsError(ShipSegError):
    """A coordinate or run lies outside the raster bounds."""


class OverlapError(ShipSegError):
    """Run-length runs overlap or are not sorted by start."""


class FormatError(ShipSegError):
    """An image file has the wrong bit depth or channel count."""


class SchemaError(ShipSegError):
    """An annotation document violates the JSON schema.

    ``path`` is a JSON pointer to the offending field ("" for the document
    as a whole).
    """

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.message = message
        self.path = path


class DegenerateError(ShipSegError):
    """Label masking would retain zero pixels."""


def class_name(class_id: int) -> str:
    return "ship" if class_id == 1 else "background"


class InsufficientClassError(ShipSegError):
    """A class has fewer pixels than the requested sample size."""

    def __init__(self, class_id: int, have: int, need: int):
        super().__init__(f"class {class_name(class_id)} has {have} pixels, need {need}")
        self.class_id = class_id


class MissingClassError(ShipSegError):
    """A class has no rasterized pixels to sample from."""

    def __init__(self, class_id: int):
        super().__init__(f"no rasterized pixels for class {class_name(class_id)}")
        self.class_id = class_id


class EmptyMaskError(ShipSegError):
    """The evaluation mask selects no pixels."""


class ShapeError(ShipSegError):
    """Two rasters that must agree in shape do not."""


class LengthMismatchError(ShipSegError):
    """Paired prediction/truth lists differ in length."""


class ConfigError(ShipSegError):
    """A configuration value is invalid or a config key is unknown."""


class VersionError(ShipSegError):
    """Parameter file has an unreadable header or unsupported format version."""


class ShapeTableError(ShipSegError):
    """Parameter file shape table disagrees with the payload or the config."""


class TooFewItemsError(ShipSegError):
    """Dataset split needs at least two ids."""


class ConfigMismatchError(ShipSegError):
    """Pretrain and finetune phases disagree on the model configuration."""


class SpecError(ShipSegError):
    """Synthetic dataset spec is invalid."""


class ValidationError(ShipSegError):
    """A submitted annotation violates the acceptance rules.

    ``path`` points at the offending field, mirroring SchemaError.
    """

    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.message = message
        self.path = path


class UnknownImageError(ShipSegError):
    """An annotation references an image id the service does not know."""


class IncompleteError(ShipSegError):
    """An export was requested while some images lack annotations."""

    def __init__(self, missing_ids):
        self.missing_ids = sorted(missing_ids)
        super().__init__("images without annotations: " + ", ".join(self.missing_ids))
