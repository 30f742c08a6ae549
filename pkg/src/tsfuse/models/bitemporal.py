"""High-resolution branch: a shared multi-stream backbone for both
snapshots, dilated-pyramid segmentation heads with separate parameters per
snapshot, and a difference + pyramid-pooling binary change head.
"""
from __future__ import annotations

from dataclasses import dataclass

from .. import functional as F
from .. import nn
from ..autograd import Tensor, as_tensor


@dataclass(frozen=True)
class BackboneConfig:
    in_channels: int = 3
    stage_widths: tuple[int, ...] = (16, 32)
    output_stride: int = 4
    norm_groups: int = 4

    def __post_init__(self):
        if self.output_stride not in (2, 4):
            raise ValueError("output stride must be 2 or 4")
        if len(self.stage_widths) < 1:
            raise ValueError("at least one stream is required")

    @property
    def num_streams(self) -> int:
        return len(self.stage_widths)

    @property
    def feature_channels(self) -> int:
        return sum(self.stage_widths)


class _Exchange(nn.Module):
    """Cross-resolution fusion: every stream receives every other stream,
    projected and resampled to its own resolution, and sums them."""

    def __init__(self, widths, groups):
        super().__init__()
        n = len(widths)
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                if j == i:
                    row.append(nn.Sequential())
                elif j > i:  # lower resolution -> project then upsample at forward
                    row.append(nn.Conv2d(widths[j], widths[i], 1, bias=False))
                else:  # higher resolution -> strided conv chain
                    steps = [nn.conv_block(widths[j] if s == 0 else widths[i],
                                           widths[i], stride=2, groups=groups)
                             for s in range(i - j)]
                    row.append(nn.Sequential(*steps))
            rows.append(nn.ModuleList(row))
        self.rows = nn.ModuleList(rows)

    def forward(self, streams):
        out = []
        for i, row in enumerate(self.rows):
            total = None
            size = streams[i].shape[2:]
            for j, proj in enumerate(row):
                fj = proj(streams[j])
                if fj.shape[2:] != size:
                    fj = F.upsample_bilinear(fj, size)
                total = fj if total is None else total + fj
            out.append(F.relu(total))
        return out


class Backbone(nn.Module):
    def __init__(self, config: BackboneConfig = BackboneConfig()):
        super().__init__()
        self.config = config
        g = config.norm_groups
        w = config.stage_widths
        stem = [nn.conv_block(config.in_channels, w[0], stride=2, groups=g)]
        if config.output_stride == 4:
            stem.append(nn.conv_block(w[0], w[0], stride=2, groups=g))
        self.stem = nn.Sequential(*stem)
        self.transitions = nn.ModuleList([
            nn.conv_block(w[i - 1], w[i], stride=2, groups=g) for i in range(1, len(w))
        ])
        self.blocks = nn.ModuleList([
            nn.ModuleList([nn.conv_block(w[i], w[i], groups=g) for i in range(s + 2)])
            for s in range(len(w) - 1)
        ])
        self.exchanges = nn.ModuleList([
            _Exchange(w[: s + 2], g) for s in range(len(w) - 1)
        ])

    def forward(self, image) -> list[Tensor]:
        return self.extract_features(image)

    def extract_features(self, image) -> list[Tensor]:
        """(B, 3, H, W) -> one feature per stream, strides os * 2**i."""
        image = as_tensor(image)
        if image.ndim != 4 or image.shape[1] != self.config.in_channels:
            raise ValueError(f"expected (B, {self.config.in_channels}, H, W) input, "
                             f"got {tuple(image.shape)}")
        h, w = image.shape[2], image.shape[3]
        os = self.config.output_stride
        if h % os or w % os:
            raise ValueError(f"input size {(h, w)} is not divisible by output stride {os}")
        streams = [self.stem(image)]
        for stage in range(len(self.transitions)):
            streams.append(self.transitions[stage](streams[-1]))
            streams = [blk(f) for blk, f in zip(self.blocks[stage], streams)]
            streams = self.exchanges[stage](streams)
        return streams

    def merged_features(self, streams) -> Tensor:
        """Upsample every stream to the highest resolution and concatenate."""
        size = streams[0].shape[2:]
        parts = [streams[0]]
        parts += [F.upsample_bilinear(s, size) for s in streams[1:]]
        return F.concat(parts, axis=1)


class SegHead(nn.Module):
    """Dilated-pyramid head: parallel atrous branches plus image pooling,
    projected to a segmentation feature, then classified and upsampled."""

    def __init__(self, in_channels, mid_channels, num_classes,
                 rates=(1, 6, 12, 18), norm_groups=4):
        super().__init__()
        branches = []
        for r in rates:
            if r == 1:
                branches.append(nn.Sequential(nn.Conv2d(in_channels, mid_channels, 1, bias=False),
                                              nn.GroupNorm(mid_channels, norm_groups), nn.ReLU()))
            else:
                branches.append(nn.Sequential(nn.Conv2d(in_channels, mid_channels, 3,
                                                        dilation=r, bias=False),
                                              nn.GroupNorm(mid_channels, norm_groups), nn.ReLU()))
        self.branches = nn.ModuleList(branches)
        self.pool_proj = nn.Conv2d(in_channels, mid_channels, 1, bias=True)
        self.project = nn.Sequential(
            nn.Conv2d(mid_channels * (len(rates) + 1), mid_channels, 1, bias=False),
            nn.GroupNorm(mid_channels, norm_groups), nn.ReLU())
        self.classifier = nn.Conv2d(mid_channels, num_classes, 1, bias=True)

    def features(self, x) -> Tensor:
        size = x.shape[2:]
        parts = [b(x) for b in self.branches]
        pooled = F.relu(self.pool_proj(F.adaptive_avg_pool2d(x, (1, 1))))
        parts.append(F.upsample_bilinear(pooled, size))
        return self.project(F.concat(parts, axis=1))

    def forward(self, x, label_size) -> tuple[Tensor, Tensor]:
        feat = self.features(x)
        logits = F.upsample_bilinear(self.classifier(feat), label_size)
        return logits, feat


class ChangeHead(nn.Module):
    """Elementwise difference of the two segmentation features, pyramid
    pooling for context, one change logit per pixel."""

    def __init__(self, in_channels, pool_channels=16, bins=(1, 2, 3, 6), norm_groups=4):
        super().__init__()
        self.bins = bins
        self.pool_projs = nn.ModuleList([
            nn.Conv2d(in_channels, pool_channels, 1, bias=True) for _ in bins
        ])
        merged = in_channels + pool_channels * len(bins)
        self.merge = nn.conv_block(merged, in_channels, groups=norm_groups)
        self.classifier = nn.Conv2d(in_channels, 1, 1, bias=True)

    def forward(self, feat_t1, feat_t2, label_size) -> Tensor:
        if feat_t1.shape != feat_t2.shape:
            raise ValueError(f"bi-temporal features must share a shape, got "
                             f"{tuple(feat_t1.shape)} vs {tuple(feat_t2.shape)}")
        diff = feat_t1 - feat_t2
        size = diff.shape[2:]
        parts = [diff]
        for bin_size, proj in zip(self.bins, self.pool_projs):
            pooled = F.relu(proj(F.adaptive_avg_pool2d(diff, (bin_size, bin_size))))
            parts.append(F.upsample_bilinear(pooled, size))
        merged = self.merge(F.concat(parts, axis=1))
        return F.upsample_bilinear(self.classifier(merged), label_size)
