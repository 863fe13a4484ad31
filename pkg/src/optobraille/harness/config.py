"""Layered pipeline configuration: defaults < config file < flag overrides.

Every run's effective configuration is serializable, so logs can snapshot
exactly what produced them. The camera calibration file is a plain-text
key-value document (fx, fy, cx, cy, k1..k4, width, height).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from optobraille.ebraille.cells import Dialect
from optobraille.ebraille.waveform import StimulationParams
from optobraille.feedback.commands import DeadbandConfig
from optobraille.imaging.fisheye import CameraIntrinsics, FisheyeDistortion

ENV_PREFIX = "OPTOBRAILLE_"


@dataclass(frozen=True)
class CameraCalibration:
    intrinsics: CameraIntrinsics
    distortion: FisheyeDistortion
    width: int
    height: int


def load_calibration_file(path) -> CameraCalibration:
    """Parse the key-value calibration document."""
    values: dict[str, float] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace("=", " ").split()
        if len(parts) != 2:
            raise ValueError(f"bad calibration line: {raw!r}")
        values[parts[0]] = float(parts[1])
    missing = {"fx", "fy", "cx", "cy", "width", "height"} - values.keys()
    if missing:
        raise ValueError(f"calibration file missing keys: {sorted(missing)}")
    return CameraCalibration(
        intrinsics=CameraIntrinsics(values["fx"], values["fy"], values["cx"], values["cy"]),
        distortion=FisheyeDistortion(values.get("k1", 0.0), values.get("k2", 0.0),
                                     values.get("k3", 0.0), values.get("k4", 0.0)),
        width=int(values["width"]),
        height=int(values["height"]),
    )


def write_calibration_file(cal: CameraCalibration, path) -> None:
    lines = [
        f"fx {cal.intrinsics.fx}", f"fy {cal.intrinsics.fy}",
        f"cx {cal.intrinsics.cx}", f"cy {cal.intrinsics.cy}",
        f"k1 {cal.distortion.k1}", f"k2 {cal.distortion.k2}",
        f"k3 {cal.distortion.k3}", f"k4 {cal.distortion.k4}",
        f"width {cal.width}", f"height {cal.height}",
    ]
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class PipelineConfig:
    calibration_path: str | None = None
    ocr_engine: str = "template"            # "template" | "external:<command>"
    dialect: Dialect = Dialect.SIX
    deadband: DeadbandConfig = field(default_factory=DeadbandConfig)
    stimulation: StimulationParams = field(default_factory=StimulationParams)
    line_pitch_px: float = 80.0
    skin_load_mohm: float = 3.0             # simulated Ohmic load for regulation
    deblur: bool = False                    # deblurring is off in the live loop
    debug_dump: bool = False
    target_frame_rate_hz: float = 3.0
    output_dir: str = "out"

    def __post_init__(self):
        if self.target_frame_rate_hz <= 0:
            raise ValueError("frame rate must be positive")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["dialect"] = self.dialect.value
        return d


def _coerce(value: str, template):
    if isinstance(template, bool):
        return value.lower() in ("1", "true", "yes", "on")
    if isinstance(template, float):
        return float(value)
    if isinstance(template, int):
        return int(value)
    return value


def layered_config(file_path=None, overrides: dict | None = None,
                   env: dict | None = None) -> PipelineConfig:
    """defaults < file < environment < explicit overrides."""
    cfg = PipelineConfig()
    layers: list[dict] = []
    if file_path:
        layers.append(json.loads(Path(file_path).read_text()))
    if env:
        env_layer = {}
        for key, value in env.items():
            if key.startswith(ENV_PREFIX):
                env_layer[key[len(ENV_PREFIX):].lower()] = value
        if env_layer:
            layers.append(env_layer)
    if overrides:
        layers.append({k: v for k, v in overrides.items() if v is not None})

    for layer in layers:
        simple = {}
        for key, value in layer.items():
            if key == "deadband":
                cfg = replace(cfg, deadband=DeadbandConfig(**value))
            elif key == "stimulation":
                cfg = replace(cfg, stimulation=StimulationParams(**value))
            elif key == "dialect":
                cfg = replace(cfg, dialect=Dialect(value))
            elif hasattr(cfg, key):
                current = getattr(cfg, key)
                simple[key] = _coerce(value, current) if isinstance(value, str) and not isinstance(current, str) else value
            else:
                raise ValueError(f"unknown config key: {key}")
        if simple:
            cfg = replace(cfg, **simple)
    return cfg
