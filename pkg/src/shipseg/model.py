"""Encoder-decoder segmentation network with skip connections.

A standard U-Net: per stage two 3x3 convolutions with ReLU, 2x max-pool
downsampling, and upsampling with skip concatenation on the way back up.
A final 1x1 convolution maps to the two class channels; softmax turns
logits into per-pixel probabilities.

Parameters persist in a self-describing container: a magic line, a JSON
header with format version, config echo, and named shape table, then the
raw little-endian float32 payloads in header order.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .errors import ConfigError, ShapeError, ShapeTableError, VersionError
from .types import ImageSample, Prediction

PARAMS_MAGIC = b"SHIPSEG-PARAMS"
PARAMS_FORMAT_VERSION = 1


@dataclass
class ModelConfig:
    depth: int = 4
    base_channels: int = 32
    in_channels: int = 1
    out_classes: int = 2
    upsample: str = "bilinear"

    def __post_init__(self):
        if self.depth < 1:
            raise ConfigError("depth must be >= 1")
        if self.base_channels < 4:
            raise ConfigError("base_channels must be >= 4")
        if self.in_channels < 1:
            raise ConfigError("in_channels must be >= 1")
        if self.out_classes != 2:
            raise ConfigError("out_classes must be 2 (ship vs background)")
        if self.upsample not in ("bilinear", "transposed"):
            raise ConfigError(f"unknown upsample mode {self.upsample!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown model config keys: {sorted(extra)}")
        return cls(**doc)


class DoubleConv(nn.Module):
    def __init__(self, in_ch: int, out_ch: int):
        super().__init__()
        self.net = nn.Sequential(
            nn.Conv2d(in_ch, out_ch, 3, padding=1),
            nn.ReLU(inplace=True),
            nn.Conv2d(out_ch, out_ch, 3, padding=1),
            nn.ReLU(inplace=True),
        )

    def forward(self, x):
        return self.net(x)


class UNet(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        feats = [config.base_channels * (2**i) for i in range(config.depth + 1)]
        self.inc = DoubleConv(config.in_channels, feats[0])
        self.downs = nn.ModuleList(
            DoubleConv(feats[i], feats[i + 1]) for i in range(config.depth)
        )
        self.up_convs = nn.ModuleList()
        self.up_samplers = nn.ModuleList()
        for i in reversed(range(config.depth)):
            if config.upsample == "transposed":
                self.up_samplers.append(nn.ConvTranspose2d(feats[i + 1], feats[i + 1], 2, stride=2))
            else:
                self.up_samplers.append(nn.Upsample(scale_factor=2, mode="bilinear", align_corners=False))
            self.up_convs.append(DoubleConv(feats[i + 1] + feats[i], feats[i]))
        self.out = nn.Conv2d(feats[0], config.out_classes, 1)

    def forward(self, x):
        skips = [self.inc(x)]
        for down in self.downs:
            skips.append(down(F.max_pool2d(skips[-1], 2)))
        x = skips[-1]
        for i, (up, conv) in enumerate(zip(self.up_samplers, self.up_convs)):
            x = up(x)
            x = conv(torch.cat([skips[-2 - i], x], dim=1))
        return self.out(x)


ModelParams = UNet  # parameters travel with their module


def build_model(config: ModelConfig, seed: int = 0) -> UNet:
    """Construct a U-Net with variance-scaled init, deterministic per seed."""
    with torch.random.fork_rng():
        torch.manual_seed(seed)
        model = UNet(config)
    model.eval()
    return model


def parameter_count(config: ModelConfig) -> int:
    return sum(p.numel() for p in UNet(config).parameters())


def _pad_amounts(size: int, multiple: int) -> tuple[int, int]:
    target = ((size + multiple - 1) // multiple) * multiple
    pad = target - size
    return pad // 2, pad - pad // 2


def forward_probs(model: UNet, batch: torch.Tensor) -> torch.Tensor:
    """Softmax probabilities for a (B, C, H, W) batch, padded and cropped
    so any raster size divisible-or-not by 2^depth works."""
    _, _, h, w = batch.shape
    multiple = 2**model.config.depth
    top, bottom = _pad_amounts(h, multiple)
    left, right = _pad_amounts(w, multiple)
    if h + top + bottom > 2 * h or w + left + right > 2 * w:
        raise ShapeError(
            f"padding {h}x{w} to a multiple of {multiple} would exceed twice the input size"
        )
    x = batch
    if top or bottom or left or right:
        x = F.pad(x, (left, right, top, bottom), mode="reflect")
    logits = model(x)
    if top or bottom or left or right:
        logits = logits[:, :, top : top + h, left : left + w]
    return torch.softmax(logits, dim=1)


def image_to_tensor(image: ImageSample, in_channels: int) -> torch.Tensor:
    """(C, H, W) float32 tensor; channel count must match the model."""
    arr = image.pixels
    channels = 1 if arr.ndim == 2 else arr.shape[2]
    if channels != in_channels:
        raise ShapeError(f"image has {channels} channels, model expects {in_channels}")
    if arr.ndim == 2:
        arr = arr[None, :, :]
    else:
        arr = np.moveaxis(arr, 2, 0)
    return torch.from_numpy(np.ascontiguousarray(arr))


def predict(model: UNet, image: ImageSample) -> Prediction:
    """Per-pixel class probabilities for one image, same H and W."""
    batch = image_to_tensor(image, model.config.in_channels).unsqueeze(0)
    model.eval()
    with torch.no_grad():
        probs = forward_probs(model, batch)
    arr = probs.squeeze(0).permute(1, 2, 0).numpy()
    return Prediction(arr)


def save_params(model: UNet, path: str | Path) -> None:
    state = model.state_dict()
    header = {
        "format_version": PARAMS_FORMAT_VERSION,
        "config": model.config.to_dict(),
        "tensors": [{"name": name, "shape": list(t.shape)} for name, t in state.items()],
    }
    with open(path, "wb") as fh:
        fh.write(PARAMS_MAGIC + b"\n")
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for t in state.values():
            fh.write(t.detach().cpu().numpy().astype("<f4").tobytes())


def load_params(path: str | Path, expected_config: ModelConfig | None = None) -> UNet:
    """Load a parameter file, verifying version, config, and shape table."""
    with open(path, "rb") as fh:
        magic = fh.readline().rstrip(b"\n")
        if magic != PARAMS_MAGIC:
            raise VersionError(f"not a parameter file (bad magic {magic[:20]!r})")
        header_line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise VersionError("parameter file header is not valid JSON") from None
    if header.get("format_version") != PARAMS_FORMAT_VERSION:
        raise VersionError(
            f"unsupported format version {header.get('format_version')!r}"
        )
    config = ModelConfig.from_dict(header["config"])
    if expected_config is not None and config != expected_config:
        raise ShapeTableError(
            f"checkpoint config {config.to_dict()} does not match expected {expected_config.to_dict()}"
        )
    model = UNet(config)
    state = model.state_dict()
    table = header.get("tensors")
    if not isinstance(table, list):
        raise ShapeTableError("missing tensor shape table")
    names = [entry.get("name") for entry in table]
    if names != list(state.keys()):
        raise ShapeTableError("tensor names do not match the architecture")
    expected_bytes = 0
    for entry in table:
        shape = tuple(entry.get("shape", ()))
        if shape != tuple(state[entry["name"]].shape):
            raise ShapeTableError(
                f"tensor {entry['name']} has shape {shape}, expected {tuple(state[entry['name']].shape)}"
            )
        expected_bytes += int(np.prod(shape)) * 4
    if len(payload) != expected_bytes:
        raise ShapeTableError(
            f"payload holds {len(payload)} bytes, shape table implies {expected_bytes}"
        )
    offset = 0
    new_state = {}
    for entry in table:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape))
        arr = np.frombuffer(payload, dtype="<f4", count=count, offset=offset).reshape(shape)
        new_state[entry["name"]] = torch.from_numpy(arr.copy())
        offset += count * 4
    model.load_state_dict(new_state)
    model.eval()
    return model
