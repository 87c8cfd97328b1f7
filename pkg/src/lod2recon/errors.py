"""Exception hierarchy shared by all pipeline stages."""


class Lod2Error(Exception):
    """Base class; ``stage`` names the pipeline step that raised."""

    stage = "core"


class InvalidTiling(Lod2Error, ValueError):
    stage = "tile"


class CoverageError(Lod2Error, ValueError):
    stage = "tile"


class BoundsError(Lod2Error, IndexError):
    stage = "codec"


class ClassRangeError(Lod2Error, ValueError):
    stage = "codec"


class LabelError(Lod2Error, KeyError):
    stage = "codec"


class AssignmentError(Lod2Error, ValueError):
    stage = "corners"


class OrderError(Lod2Error, ValueError):
    stage = "plane"


class DegenerateError(Lod2Error, ValueError):
    stage = "plane"


class FootprintError(Lod2Error, ValueError):
    stage = "merge"


class EmptyEvalError(Lod2Error, ValueError):
    stage = "evaluate"


class FrameMismatchError(Lod2Error, ValueError):
    stage = "evaluate"


class PlacementError(Lod2Error, RuntimeError):
    stage = "synth"


class ExportError(Lod2Error, OSError):
    stage = "export"
