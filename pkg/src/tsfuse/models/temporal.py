"""Time-series branch: a U-shaped spatial encoder applied per month,
temporal attention computed at the lowest resolution, attention-weighted
collapse of every skip level, and a decoder back to full resolution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import functional as F
from .. import nn
from ..autograd import Tensor, as_tensor


@dataclass(frozen=True)
class TemporalEncoderConfig:
    in_channels: int = 14
    out_channels: int = 64
    widths: tuple[int, ...] = (32, 64, 128)
    attention_heads: int = 4
    time_embedding: bool = True
    norm_groups: int = 4

    def __post_init__(self):
        if len(self.widths) < 2:
            raise ValueError("temporal encoder needs at least 2 resolution levels")
        for w in self.widths:
            if w % self.attention_heads:
                raise ValueError(f"level width {w} must be divisible by "
                                 f"{self.attention_heads} attention heads")

    @property
    def depth(self) -> int:
        return len(self.widths)


def month_embedding(timestamps: np.ndarray, dim: int) -> np.ndarray:
    """Sinusoidal embedding of month indices, (B, T, dim) float32."""
    pos = np.asarray(timestamps, dtype=np.float64)[..., None]
    half = dim // 2
    denom = 10000.0 ** (np.arange(half) * 2.0 / dim)
    ang = pos / denom
    emb = np.empty(pos.shape[:-1] + (dim,), dtype=np.float32)
    emb[..., 0::2] = np.sin(ang)
    emb[..., 1::2] = np.cos(ang[..., : dim - half])
    return emb


class TemporalEncoder(nn.Module):
    def __init__(self, config: TemporalEncoderConfig = TemporalEncoderConfig()):
        super().__init__()
        self.config = config
        g = config.norm_groups
        w = config.widths
        self.level0 = nn.conv_block(config.in_channels, w[0], groups=g)
        self.down = nn.ModuleList([
            nn.conv_block(w[i - 1], w[i], stride=2, groups=g) for i in range(1, len(w))
        ])
        heads = config.attention_heads
        self.d_k = w[-1] // heads
        self.key_proj = nn.Conv2d(w[-1], heads * self.d_k, 1, bias=False)
        self.query = nn.Parameter((heads, self.d_k), ("normal", 1.0 / math.sqrt(self.d_k)))
        self.up_blocks = nn.ModuleList([
            nn.conv_block(w[i] + w[i + 1], w[i], groups=g)
            for i in range(len(w) - 2, -1, -1)
        ])
        self.out_proj = nn.Conv2d(w[0], config.out_channels, 1, bias=True)

    def attention_weights(self, lowest: Tensor, mask: np.ndarray,
                          timestamps: np.ndarray, batch: int, steps: int) -> Tensor:
        """(B, T, heads, hL, wL) weights; masked steps get exactly zero."""
        cfg = self.config
        _, c, hl, wl = lowest.shape
        feat = lowest
        if cfg.time_embedding:
            emb = month_embedding(timestamps, c).reshape(batch * steps, c, 1, 1)
            feat = feat + Tensor(emb)
        keys = self.key_proj(feat)
        keys = F.reshape(keys, (batch, steps, cfg.attention_heads, self.d_k, hl, wl))
        q = F.reshape(self.query, (1, 1, cfg.attention_heads, self.d_k, 1, 1))
        logits = F.tsum(keys * q, axis=3) * (1.0 / math.sqrt(self.d_k))
        return F.masked_softmax(logits, mask[:, :, None, None, None], axis=1)

    def forward(self, series, mask=None, timestamps=None):
        return self.encode(series, mask, timestamps)

    def encode(self, series, mask=None, timestamps=None) -> Tensor:
        """series (B, T, C, h, w) -> (B, out_channels, h, w)."""
        cfg = self.config
        series = as_tensor(series)
        b, t, c, h, w = series.shape
        if c != cfg.in_channels:
            raise ValueError(f"series has {c} bands but the encoder expects {cfg.in_channels}")
        if mask is None:
            mask = np.ones((b, t), dtype=bool)
        mask = np.asarray(mask).astype(bool)
        if mask.ndim == 1:
            mask = np.broadcast_to(mask, (b, t)).copy()
        if mask.shape != (b, t):
            raise ValueError(f"mask shape {mask.shape} does not match (batch, steps)=({b},{t})")
        if not mask.any(axis=1).all():
            raise ValueError("every sample needs at least one unmasked timestep")
        if timestamps is None:
            timestamps = np.broadcast_to(np.arange(t), (b, t))
        timestamps = np.asarray(timestamps)
        if timestamps.ndim == 1:
            timestamps = np.broadcast_to(timestamps, (b, t))

        x = F.reshape(series, (b * t, c, h, w))
        skips = [self.level0(x)]
        for down in self.down:
            skips.append(down(skips[-1]))

        weights = self.attention_weights(skips[-1], mask, timestamps, b, t)
        heads = cfg.attention_heads

        collapsed = []
        for level, feat in enumerate(skips):
            cl = cfg.widths[level]
            _, _, hl, wl = feat.shape
            if (hl, wl) == weights.shape[3:]:
                wlv = weights
            else:
                flat = F.reshape(weights, (b, t * heads) + weights.shape[3:])
                wlv = F.reshape(F.upsample_bilinear(flat, (hl, wl)),
                                (b, t, heads, hl, wl))
            fv = F.reshape(feat, (b, t, heads, cl // heads, hl, wl))
            merged = F.tsum(fv * F.reshape(wlv, (b, t, heads, 1, hl, wl)), axis=1)
            collapsed.append(F.reshape(merged, (b, cl, hl, wl)))

        z = collapsed[-1]
        for i, block in enumerate(self.up_blocks):
            skip = collapsed[len(collapsed) - 2 - i]
            z = F.upsample_bilinear(z, skip.shape[2:])
            z = block(F.concat([z, skip], axis=1))
        return self.out_proj(z)


class SeriesHead(nn.Module):
    """Per-pixel class logits over the encoded series feature."""

    def __init__(self, in_channels: int, num_classes: int):
        super().__init__()
        self.proj = nn.Conv2d(in_channels, num_classes, 1, bias=True)

    def forward(self, feature) -> Tensor:
        return self.proj(feature)
