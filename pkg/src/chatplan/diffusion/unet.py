"""Noise-predicting U-Net conditioned on room tokens.

Input is the outline-masked noisy plan concatenated with the outline
(13 + 1 channels); the predicted noise is multiplied by the outline, so
exterior cells are exactly zero. Cross-attention sites at the 16x16 and
8x8 resolutions attend from spatial positions to conditioning rows and
report their post-softmax maps, which is the editing surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import torch
import torch.nn.functional as F
from torch import nn

from ..core.types import ValidationError

# Controller hook: (site id, probs (B, heads, queries, tokens)) -> probs.
AttentionHook = Callable[[str, torch.Tensor], torch.Tensor]


@dataclass(frozen=True)
class UNetConfig:
    base_width: int = 64
    channel_mults: tuple[int, ...] = (1, 2, 4)
    num_res_blocks: int = 2
    attn_heads: int = 4
    cond_dim: int = 256
    in_channels: int = 14  # 13 masked plan channels + 1 outline
    out_channels: int = 13

    def __post_init__(self) -> None:
        if self.base_width % 8:
            raise ValidationError("base_width must be a multiple of 8")

    def to_json_dict(self) -> dict:
        return {
            "base_width": self.base_width,
            "channel_mults": list(self.channel_mults),
            "num_res_blocks": self.num_res_blocks,
            "attn_heads": self.attn_heads,
            "cond_dim": self.cond_dim,
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "UNetConfig":
        data = dict(data)
        data["channel_mults"] = tuple(data["channel_mults"])
        return cls(**data)


def timestep_embedding(t: torch.Tensor, dim: int) -> torch.Tensor:
    """Sinusoidal features of the (integer) timestep."""
    half = dim // 2
    freqs = torch.exp(
        -math.log(10000.0) * torch.arange(half, dtype=torch.float32, device=t.device) / half
    )
    args = t.float()[:, None] * freqs[None, :]
    return torch.cat([torch.cos(args), torch.sin(args)], dim=1)


class ResBlock(nn.Module):
    def __init__(self, in_ch: int, out_ch: int, time_dim: int) -> None:
        super().__init__()
        self.norm1 = nn.GroupNorm(8, in_ch)
        self.conv1 = nn.Conv2d(in_ch, out_ch, 3, padding=1)
        self.time_proj = nn.Linear(time_dim, out_ch)
        self.norm2 = nn.GroupNorm(8, out_ch)
        self.conv2 = nn.Conv2d(out_ch, out_ch, 3, padding=1)
        self.skip = nn.Conv2d(in_ch, out_ch, 1) if in_ch != out_ch else nn.Identity()

    def forward(self, x: torch.Tensor, t_emb: torch.Tensor) -> torch.Tensor:
        h = self.conv1(F.silu(self.norm1(x)))
        h = h + self.time_proj(t_emb)[:, :, None, None]
        h = self.conv2(F.silu(self.norm2(h)))
        return h + self.skip(x)


class CrossAttention(nn.Module):
    """Spatial queries attending to conditioning tokens at one site."""

    def __init__(self, channels: int, cond_dim: int, heads: int, site: str) -> None:
        super().__init__()
        if channels % heads:
            raise ValidationError("channels must be divisible by heads")
        self.site = site
        self.heads = heads
        self.head_dim = channels // heads
        self.norm = nn.GroupNorm(8, channels)
        self.q_proj = nn.Conv2d(channels, channels, 1)
        self.k_proj = nn.Linear(cond_dim, channels)
        self.v_proj = nn.Linear(cond_dim, channels)
        self.out_proj = nn.Conv2d(channels, channels, 1)

    def forward(
        self,
        x: torch.Tensor,
        tokens: torch.Tensor,
        token_mask: Optional[torch.Tensor] = None,
        hook: Optional[AttentionHook] = None,
    ) -> torch.Tensor:
        """x: (B, C, H, W); tokens: (B, N, cond_dim);
        token_mask: (B, N) bool, True = valid."""
        b, c, height, width = x.shape
        n = tokens.shape[1]
        q = self.q_proj(self.norm(x))
        q = q.view(b, self.heads, self.head_dim, height * width).transpose(2, 3)
        k = self.k_proj(tokens).view(b, n, self.heads, self.head_dim).permute(0, 2, 1, 3)
        v = self.v_proj(tokens).view(b, n, self.heads, self.head_dim).permute(0, 2, 1, 3)
        scores = q @ k.transpose(2, 3) / self.head_dim**0.5  # (B, heads, HW, N)
        if token_mask is not None:
            invalid = ~token_mask[:, None, None, :]
            scores = scores.masked_fill(invalid, float("-inf"))
        probs = torch.softmax(scores, dim=-1)
        if hook is not None:
            probs = hook(self.site, probs)
        out = probs @ v  # (B, heads, HW, head_dim)
        out = out.transpose(2, 3).reshape(b, c, height, width)
        return x + self.out_proj(out)


class Downsample(nn.Module):
    def __init__(self, channels: int) -> None:
        super().__init__()
        self.conv = nn.Conv2d(channels, channels, 3, stride=2, padding=1)

    def forward(self, x): return self.conv(x)


class Upsample(nn.Module):
    def __init__(self, channels: int) -> None:
        super().__init__()
        self.conv = nn.Conv2d(channels, channels, 3, padding=1)

    def forward(self, x):
        return self.conv(nn.functional.interpolate(x, scale_factor=2, mode="nearest"))


class DenoiserNetwork(nn.Module):
    """U-Net over 64x64 with an 8x8 bottleneck and cross-attention at the
    16x16 level blocks plus the bottleneck."""

    def __init__(self, config: UNetConfig = UNetConfig()) -> None:
        super().__init__()
        self.config = config
        c = config.base_width
        mults = config.channel_mults
        time_dim = c * 4
        self.time_mlp = nn.Sequential(
            nn.Linear(c, time_dim), nn.SiLU(), nn.Linear(time_dim, time_dim)
        )
        self.stem = nn.Conv2d(config.in_channels, c, 3, padding=1)

        attn_levels = {len(mults) - 1}  # the 16x16 level
        self.down_blocks = nn.ModuleList()
        self.down_attn = nn.ModuleList()
        self.downsamples = nn.ModuleList()
        ch = c
        skip_channels = [c]
        for level, mult in enumerate(mults):
            out_ch = c * mult
            for i in range(config.num_res_blocks):
                self.down_blocks.append(ResBlock(ch, out_ch, time_dim))
                ch = out_ch
                self.down_attn.append(
                    CrossAttention(ch, config.cond_dim, config.attn_heads,
                                   f"down.16.{i}")
                    if level in attn_levels else None
                )
                skip_channels.append(ch)
            if level < len(mults) - 1:
                self.downsamples.append(Downsample(ch))
                skip_channels.append(ch)

        # 8x8 bottleneck; its skip stays on the 16x16 path.
        self.neck_down = Downsample(ch)
        self.mid_block1 = ResBlock(ch, ch, time_dim)
        self.mid_attn = CrossAttention(ch, config.cond_dim, config.attn_heads, "mid.8.0")
        self.mid_block2 = ResBlock(ch, ch, time_dim)
        self.neck_up = Upsample(ch)

        self.up_blocks = nn.ModuleList()
        self.up_attn = nn.ModuleList()
        self.upsamples = nn.ModuleList()
        for level in reversed(range(len(mults))):
            out_ch = c * mults[level]
            for i in range(config.num_res_blocks + 1):
                self.up_blocks.append(
                    ResBlock(ch + skip_channels.pop(), out_ch, time_dim)
                )
                ch = out_ch
                self.up_attn.append(
                    CrossAttention(ch, config.cond_dim, config.attn_heads,
                                   f"up.16.{i}")
                    if level in attn_levels else None
                )
            if level > 0:
                self.upsamples.append(Upsample(ch))

        self.out_norm = nn.GroupNorm(8, ch)
        self.out_conv = nn.Conv2d(ch, config.out_channels, 3, padding=1)
        # Zero-init the output so an untrained net predicts zero noise.
        nn.init.zeros_(self.out_conv.weight)
        nn.init.zeros_(self.out_conv.bias)

    @property
    def attention_sites(self) -> tuple[str, ...]:
        sites = [a.site for a in self.down_attn if a is not None]
        sites.append(self.mid_attn.site)
        sites += [a.site for a in self.up_attn if a is not None]
        return tuple(sites)

    def forward(
        self,
        x_masked: torch.Tensor,
        t: torch.Tensor,
        outline: torch.Tensor,
        tokens: torch.Tensor,
        token_mask: Optional[torch.Tensor] = None,
        hook: Optional[AttentionHook] = None,
    ) -> torch.Tensor:
        """x_masked: (B, 13, 64, 64) already outline-masked;
        outline: (B, 1, 64, 64); tokens: (B, N, cond_dim).

        Returns the outline-masked noise prediction (B, 13, 64, 64)."""
        t_emb = self.time_mlp(
            timestep_embedding(t, self.config.base_width).to(self.stem.weight.dtype)
        )
        h = self.stem(torch.cat([x_masked, outline], dim=1))
        skips = [h]
        blocks = iter(zip(self.down_blocks, self.down_attn))
        downs = iter(self.downsamples)
        mults = self.config.channel_mults
        for level in range(len(mults)):
            for _ in range(self.config.num_res_blocks):
                block, attn = next(blocks)
                h = block(h, t_emb)
                if attn is not None:
                    h = attn(h, tokens, token_mask, hook)
                skips.append(h)
            if level < len(mults) - 1:
                h = next(downs)(h)
                skips.append(h)

        h = self.neck_down(h)
        h = self.mid_block1(h, t_emb)
        h = self.mid_attn(h, tokens, token_mask, hook)
        h = self.mid_block2(h, t_emb)
        h = self.neck_up(h)

        blocks = iter(zip(self.up_blocks, self.up_attn))
        ups = iter(self.upsamples)
        for level in reversed(range(len(mults))):
            for _ in range(self.config.num_res_blocks + 1):
                block, attn = next(blocks)
                h = block(torch.cat([h, skips.pop()], dim=1), t_emb)
                if attn is not None:
                    h = attn(h, tokens, token_mask, hook)
            if level > 0:
                h = next(ups)(h)

        eps = self.out_conv(F.silu(self.out_norm(h)))
        return eps * outline
