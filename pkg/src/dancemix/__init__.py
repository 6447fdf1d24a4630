"""dancemix: movement-driven musical arrangement.

Pose windows become trajectory images, a convolutional encoder turns them
into latents, a generator predicts the next audio-clip latent from movement
plus what just played, and cosine retrieval picks the closest clip from a
curated library for crossfaded playback. A statistics suite quantifies how
strongly the resulting audio tracks the movement.
"""

from . import analysis, dsp, engine, features, library, neural, pose, raster, retrieval
from .errors import DancemixError

__version__ = "0.1.0"

__all__ = [
    "DancemixError",
    "analysis",
    "dsp",
    "engine",
    "features",
    "library",
    "neural",
    "pose",
    "raster",
    "retrieval",
    "__version__",
]
