"""Dense scene-map recovery from per-pixel distributions over depth derivatives."""

from ._core import (
    FileFormatError,
    MixtureModel,
    WeightMap,
    analyze,
    decode_argmax,
    depth_to_scene,
    evaluate,
    filter_bank,
    fit_mixture_model,
    globalize,
    parse_subset,
    read_pfm,
    scene_to_depth,
    synth_predict,
    synth_scene,
    write_pfm,
)

__all__ = [
    "FileFormatError",
    "MixtureModel",
    "WeightMap",
    "analyze",
    "decode_argmax",
    "depth_to_scene",
    "evaluate",
    "filter_bank",
    "fit_mixture_model",
    "globalize",
    "parse_subset",
    "read_pfm",
    "scene_to_depth",
    "synth_predict",
    "synth_scene",
    "write_pfm",
]
