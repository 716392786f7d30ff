"""Skin lesion segmentation and description toolkit."""

from ._core import (
    LesionError,
    connected_components,
    convex_hull_mask,
    decode_image,
    default_config,
    descriptors,
    descriptors_csv,
    distance_transform,
    encode_png,
    evaluate_mask,
    kmeans,
    load_image,
    load_mask,
    schema,
    segment,
    synth,
)

__all__ = [
    "LesionError",
    "connected_components",
    "convex_hull_mask",
    "decode_image",
    "default_config",
    "descriptors",
    "descriptors_csv",
    "distance_transform",
    "encode_png",
    "evaluate_mask",
    "kmeans",
    "load_image",
    "load_mask",
    "schema",
    "segment",
    "synth",
]
