"""The full network: shared backbone over both snapshots, fused series
contribution added to the high-res features before two separate
segmentation heads, and a difference-based change head.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import functional as F
from .. import nn
from ..autograd import Tensor, as_tensor
from ..geo import AlignmentSpec
from .bitemporal import Backbone, BackboneConfig, ChangeHead, SegHead
from .fusion import Fusion, FusionConfig
from .temporal import SeriesHead, TemporalEncoder, TemporalEncoderConfig


@dataclass
class ModelOutputs:
    seg_t1: Tensor  # (B, K, H, W) logits
    seg_t2: Tensor  # (B, K, H, W) logits
    seg_series: Tensor | None  # (B, K, h, w) logits, None when the series is disabled
    change: Tensor  # (B, 1, H, W) logit


@dataclass(frozen=True)
class NetworkConfig:
    num_classes: int = 18
    backbone: BackboneConfig = field(default_factory=BackboneConfig)
    temporal: TemporalEncoderConfig = field(default_factory=TemporalEncoderConfig)
    head_channels: int = 32
    aspp_rates: tuple[int, ...] = (1, 6, 12, 18)
    ppm_bins: tuple[int, ...] = (1, 2, 3, 6)
    fusion_bottleneck: int = 16
    fusion_dilation: int = 2
    use_series: bool = True
    pre_upsample_series: bool = False  # encode the stack at label resolution
    norm_groups: int = 4


def desk_config(num_classes: int = 18, use_series: bool = True) -> NetworkConfig:
    """CPU-trainable defaults for the 128px/32px synthetic geometry."""
    return NetworkConfig(
        num_classes=num_classes,
        backbone=BackboneConfig(stage_widths=(16, 32)),
        temporal=TemporalEncoderConfig(widths=(16, 32, 64), out_channels=32),
        head_channels=32,
        use_series=use_series,
    )


def paper_scale_config(num_classes: int = 18, use_series: bool = True) -> NetworkConfig:
    """Full-geometry defaults (512px/128px inputs, 64-channel series feature)."""
    return NetworkConfig(
        num_classes=num_classes,
        backbone=BackboneConfig(stage_widths=(32, 64)),
        temporal=TemporalEncoderConfig(widths=(32, 64, 128), out_channels=64),
        head_channels=64,
        use_series=use_series,
    )


class ChangeSegNet(nn.Module):
    def __init__(self, config: NetworkConfig = NetworkConfig()):
        super().__init__()
        self.config = config
        self.backbone = Backbone(config.backbone)
        feat_ch = config.backbone.feature_channels
        self.seg_head_t1 = SegHead(feat_ch, config.head_channels, config.num_classes,
                                   config.aspp_rates, config.norm_groups)
        self.seg_head_t2 = SegHead(feat_ch, config.head_channels, config.num_classes,
                                   config.aspp_rates, config.norm_groups)
        self.change_head = ChangeHead(config.head_channels, bins=config.ppm_bins,
                                      norm_groups=config.norm_groups)
        if config.use_series:
            self.temporal = TemporalEncoder(config.temporal)
            self.series_head = SeriesHead(config.temporal.out_channels, config.num_classes)
            self.fusion = None  # bound to the feature geometry at first forward
        else:
            self.temporal = None
            self.series_head = None
            self.fusion = None
        self._fusion_size = None

    def _ensure_fusion(self, target_size, seed: int = 0):
        cfg = self.config
        if self.fusion is not None and self._fusion_size == tuple(target_size):
            return
        if self.fusion is not None:
            raise ValueError(f"fusion was built for feature size {self._fusion_size}, "
                             f"got {tuple(target_size)}; one model handles one geometry")
        self.fusion = Fusion(FusionConfig(
            series_channels=cfg.temporal.out_channels,
            target_channels=cfg.backbone.feature_channels,
            target_size=tuple(target_size),
            bottleneck_channels=cfg.fusion_bottleneck,
            dilation=cfg.fusion_dilation,
        ))
        self._fusion_size = tuple(target_size)
        self.fusion.initialize(self._init_seed, dtype=self._init_dtype)

    def initialize(self, seed: int, dtype=None):
        self._init_seed = seed
        self._init_dtype = dtype
        return super().initialize(seed, dtype)

    def forward(self, t1, t2, series=None, spec: AlignmentSpec | None = None,
                mask=None, timestamps=None) -> ModelOutputs:
        t1 = as_tensor(t1)
        t2 = as_tensor(t2)
        if t1.shape != t2.shape:
            raise ValueError(f"snapshot shapes differ: {tuple(t1.shape)} vs {tuple(t2.shape)}")
        label_size = (t1.shape[2], t1.shape[3])

        hr1 = self.backbone.merged_features(self.backbone.extract_features(t1))
        hr2 = self.backbone.merged_features(self.backbone.extract_features(t2))

        series_logits = None
        if self.config.use_series:
            if series is None or spec is None:
                raise ValueError("this model fuses the time series; pass `series` and `spec` "
                                 "or build it with use_series=False")
            series = as_tensor(series)
            if self.config.pre_upsample_series:
                b, t, c, h, w = series.shape
                flat = F.reshape(series, (b * t, c, h, w))
                flat = F.upsample_bilinear(flat, label_size)
                series = F.reshape(flat, (b, t, c) + tuple(label_size))
            sf = self.temporal.encode(series, mask, timestamps)
            series_logits = self.series_head(sf)
            self._ensure_fusion(hr1.shape[2:])
            contrib = self.fusion.series_contribution(sf, spec)
            hr1 = hr1 + contrib
            hr2 = hr2 + contrib

        logits1, feat1 = self.seg_head_t1(hr1, label_size)
        logits2, feat2 = self.seg_head_t2(hr2, label_size)
        change = self.change_head(feat1, feat2, label_size)
        return ModelOutputs(seg_t1=logits1, seg_t2=logits2,
                            seg_series=series_logits, change=change)


def build_network(config: NetworkConfig, seed: int = 0, dtype=None,
                  feature_size: tuple[int, int] | None = None) -> ChangeSegNet:
    """Construct and deterministically initialize the network.

    `feature_size` pre-binds the fusion module (backbone feature grid) so
    every parameter exists before training/checkpointing; when omitted it
    is bound lazily on the first forward pass.
    """
    net = ChangeSegNet(config)
    net.initialize(seed, dtype)
    if config.use_series and feature_size is not None:
        net._ensure_fusion(tuple(feature_size))
    return net


def feature_size_for(config: NetworkConfig, label_size) -> tuple[int, int]:
    os = config.backbone.output_stride
    return (label_size[0] // os, label_size[1] // os)
