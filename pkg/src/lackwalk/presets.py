"""Named experiment bundles reproducing the reference sweeps and scaling runs."""
from dataclasses import dataclass
from types import MappingProxyType
from typing import Any, Dict, Mapping

from lackwalk.config import ConfigError


@dataclass(frozen=True)
class Preset:
    name: str
    command: str
    description: str
    values: Mapping[str, Any]


def _preset(name: str, command: str, description: str, **values: Any) -> Preset:
    return Preset(name, command, description, MappingProxyType(values))


PRESETS: Dict[str, Preset] = {
    p.name: p
    for p in (
        _preset(
            "fig2",
            "sweep",
            "1D ring N=1000, adjacent runs M=1,2,5,8, Na from 0.01 to 10",
            dimension=1,
            side=1000,
            coin="g",
            clusters="run:1 run:2 run:5 run:8",
            weights="0.01/N:10/N:100",
        ),
        _preset(
            "fig3",
            "scale",
            "1D rings N=200..1000, a=0.1/N, adjacent runs M=1,2,5,8",
            dimension=1,
            side=1000,
            coin="g",
            loop_weight="0.1/N",
            clusters="run:1 run:2 run:5 run:8",
            sizes="200,400,600,800,1000",
            fits="power_law,linear_over_M",
        ),
        _preset(
            "fig4",
            "sweep",
            "40x40 torus, clusters 1x1, 2x1, 5x5, 8x8 and diagonal, a from 1e-4 to 1e-1",
            dimension=2,
            side=40,
            coin="g",
            clusters="block:1x1 block:2x1 block:5x5 block:8x8 diag",
            weights="0.0001:0.1",
        ),
        _preset(
            "fig5",
            "scale",
            "tori 20x20..100x100, a=0.01, clusters 1x1, 2x1, 3x3, 6x6 and diagonal",
            dimension=2,
            side=100,
            coin="g",
            loop_weight="0.01",
            clusters="block:1x1 block:2x1 block:3x3 block:6x6 diag",
            sizes="20,40,60,80,100",
            fits="power_law,sqrt_log",
        ),
    )
}


def get_preset(name: str, command: str) -> Preset:
    """Look up a preset and check it belongs to `command`.

    Raises:
        ConfigError: For unknown names or a preset of another command
    """
    preset = PRESETS.get(name)
    if preset is None:
        raise ConfigError(
            f"preset: unknown preset {name!r} (choose from {', '.join(sorted(PRESETS))})",
            field="preset",
        )
    if preset.command != command:
        raise ConfigError(
            f"preset: {name} is a '{preset.command}' preset, not '{command}'", field="preset"
        )
    return preset
