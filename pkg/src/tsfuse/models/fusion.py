"""Two-path fusion of the encoded time series into the high-res features:
a geographically aligned crop/project/upsample path plus a dilated
bottleneck path that keeps the wide spatial context. Both paths are
bias-free by default so an all-zero series contributes exactly nothing.
"""
from __future__ import annotations

from dataclasses import dataclass

from .. import functional as F
from .. import nn
from ..autograd import Tensor, as_tensor
from ..geo import AlignmentSpec, center_crop_window


@dataclass(frozen=True)
class FusionConfig:
    series_channels: int = 64
    target_channels: int = 48
    target_size: tuple[int, int] = (32, 32)
    bottleneck_channels: int = 16
    dilation: int = 2
    use_bias: bool = False

    def __post_init__(self):
        if min(self.series_channels, self.target_channels,
               self.bottleneck_channels, self.dilation, *self.target_size) < 1:
            raise ValueError("all fusion dimensions must be positive")


class Fusion(nn.Module):
    def __init__(self, config: FusionConfig = FusionConfig()):
        super().__init__()
        self.config = config
        bias = config.use_bias
        self.align_proj = nn.Conv2d(config.series_channels, config.target_channels,
                                    1, bias=bias)
        self.ctx_reduce = nn.Conv2d(config.series_channels, config.bottleneck_channels,
                                    1, bias=bias)
        self.ctx_dilated = nn.Conv2d(config.bottleneck_channels, config.bottleneck_channels,
                                     3, dilation=config.dilation, bias=bias)
        self.ctx_expand = nn.Conv2d(config.bottleneck_channels, config.target_channels,
                                    1, bias=bias)

    def align_path(self, series_feat, spec: AlignmentSpec) -> Tensor:
        """Center-crop to the high-res footprint, project, upsample."""
        series_feat = as_tensor(series_feat)
        h, w = series_feat.shape[2], series_feat.shape[3]
        win = center_crop_window(spec, (h, w))
        rs, cs = win.slices()
        cropped = F.slice_nd(series_feat, (slice(None), slice(None), rs, cs))
        return F.upsample_bilinear(self.align_proj(cropped), self.config.target_size)

    def context_path(self, series_feat) -> Tensor:
        """Bottleneck + dilated conv keeping the full series footprint."""
        z = F.relu(self.ctx_reduce(as_tensor(series_feat)))
        z = F.relu(self.ctx_dilated(z))
        z = self.ctx_expand(z)
        return F.upsample_bilinear(z, self.config.target_size)

    def series_contribution(self, series_feat, spec: AlignmentSpec) -> Tensor:
        return self.align_path(series_feat, spec) + self.context_path(series_feat)

    def forward(self, hr_feat, series_feat, spec: AlignmentSpec) -> Tensor:
        return self.fuse(hr_feat, series_feat, spec)

    def fuse(self, hr_feat, series_feat, spec: AlignmentSpec) -> Tensor:
        hr_feat = as_tensor(hr_feat)
        expected = (self.config.target_channels,) + tuple(self.config.target_size)
        if tuple(hr_feat.shape[1:]) != expected:
            raise ValueError(f"high-res feature shape {tuple(hr_feat.shape[1:])} does not "
                             f"match the fusion target {expected}")
        return hr_feat + self.series_contribution(series_feat, spec)
