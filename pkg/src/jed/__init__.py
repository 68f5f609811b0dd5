"""Joint low-light enhancement and denoising by sequential Retinex decomposition."""

__version__ = "0.1.0"

from .imagecore import decode_image, encode_image, read_image, rgb_to_luma, write_image
from .params import JedParams, default_params
from .pipeline import enhance, gamma_correct
from .retinex import DecompositionResult, decompose, estimate_illumination, estimate_reflectance

__all__ = [
    "DecompositionResult",
    "JedParams",
    "decode_image",
    "decompose",
    "default_params",
    "encode_image",
    "enhance",
    "estimate_illumination",
    "estimate_reflectance",
    "gamma_correct",
    "read_image",
    "rgb_to_luma",
    "write_image",
]
