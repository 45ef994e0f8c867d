"""Command-line entry points and scene directory handling."""

from .evaluate import MetricsReport, SceneMetrics, cmd_eval, evaluate_scene
from .fitcmd import InitSpec, cmd_fit
from .scene import Scene, load_scene
from .synth import SynthConfig, cmd_synth

__all__ = [
    "InitSpec",
    "MetricsReport",
    "Scene",
    "SceneMetrics",
    "SynthConfig",
    "cmd_eval",
    "cmd_fit",
    "cmd_synth",
    "evaluate_scene",
    "load_scene",
]
