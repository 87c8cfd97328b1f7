"""LOD2 roof reconstruction from roof-section masks and height-classed corner squares."""

from .codec import CornerSquare, DatasetSplit
from .errors import Lod2Error
from .pipeline import PipelineConfig, reconstruct, run_pipeline
from .plane import DEFAULT_HEIGHT, Provenance, RoofPlane
from .synth import NoiseParams, SynthParams

__all__ = [
    "CornerSquare", "DatasetSplit", "Lod2Error", "PipelineConfig", "reconstruct", "run_pipeline",
    "DEFAULT_HEIGHT", "Provenance", "RoofPlane", "NoiseParams", "SynthParams",
]
