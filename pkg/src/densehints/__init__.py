"""Sparse disparity hint densification and hint-guided stereo matching."""

from .core import (
    PRESETS,
    DisparityMap,
    GraphParams,
    GuidanceParams,
    HintMap,
    LinearParams,
    RgbImage,
    Violation,
    density,
    validate_hint_map,
)
from .expand_graph import expand_graph
from .expand_linear import expand_linear, expand_linear_multi
from .guidance import compute_range, confidence_filter, modulate_cost_volume, sample_candidates
from .matcher import MatchParams, baseline_match, guided_match
from .metrics import evaluate
from .synth import SceneSpec, make_scene

__version__ = "0.1.0"

__all__ = [
    "PRESETS",
    "DisparityMap",
    "GraphParams",
    "GuidanceParams",
    "HintMap",
    "LinearParams",
    "MatchParams",
    "RgbImage",
    "SceneSpec",
    "Violation",
    "baseline_match",
    "compute_range",
    "confidence_filter",
    "density",
    "evaluate",
    "expand_graph",
    "expand_linear",
    "expand_linear_multi",
    "guided_match",
    "make_scene",
    "modulate_cost_volume",
    "sample_candidates",
    "validate_hint_map",
]
