"""Masked conditional denoising engine: training, seeded sampling, checkpoints.

The outline mask is applied to the network input, the predicted noise, the
training noise, and every intermediate sampling state, so nothing outside
the outline ever influences or leaves the interior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import torch
from torch import nn

from ..conditioning import ConditioningSet, GraphConditioner, GraphormerConfig
from ..core.codecs import PALETTE_VERSION
from ..core.graph import build_room_graph
from ..core.raster import OutlineMask, PlanGrid, tensor_to_grid
from ..core.types import RoomsDocument, ValidationError
from ..editing.store import AttentionStore
from .schedule import DiffusionSchedule
from .unet import AttentionHook, DenoiserNetwork, UNetConfig

CHECKPOINT_FORMAT = 1


@dataclass(frozen=True)
class SampleRequest:
    outline: OutlineMask
    conditioning: ConditioningSet
    seed: int
    guidance_scale: float = 2.0
    steps: int = 50

    def __post_init__(self) -> None:
        if self.guidance_scale < 0:
            raise ValidationError("guidance_scale must be >= 0")
        if self.steps < 1:
            raise ValidationError("steps must be >= 1")


def cfg_combine(
    eps_uncond: torch.Tensor, eps_cond: torch.Tensor, w: float
) -> torch.Tensor:
    """Classifier-free guidance: eps_u + w * (eps_c - eps_u)."""
    if eps_uncond.shape != eps_cond.shape:
        raise ValidationError("guidance branches must have equal shape")
    return eps_uncond + w * (eps_cond - eps_uncond)


class DiffusionEngine:
    """Owns the denoiser, the conditioner, and the schedule."""

    def __init__(
        self,
        network: DenoiserNetwork,
        conditioner: GraphConditioner,
        schedule: DiffusionSchedule,
        p_uncond: float = 0.1,
        lr: float = 2e-4,
    ) -> None:
        if network.config.cond_dim != conditioner.config.d_model:
            raise ValidationError("network cond_dim must equal conditioner d_model")
        self.network = network
        self.conditioner = conditioner
        self.schedule = schedule
        self.p_uncond = p_uncond
        self.optimizer = torch.optim.Adam(
            list(network.parameters()) + list(conditioner.parameters()), lr=lr
        )

    # ----- conditioning -------------------------------------------------

    def condition(self, doc: RoomsDocument) -> ConditioningSet:
        return self.conditioner(doc, build_room_graph(doc))

    def _tokens(
        self, conditioning: Optional[ConditioningSet]
    ) -> tuple[torch.Tensor, torch.Tensor]:
        if conditioning is None:
            rows = self.conditioner.null_token
        else:
            if conditioning.n_rooms == 0:
                raise ValidationError("conditioning must have at least one room")
            rows = conditioning.embeddings
        tokens = rows.unsqueeze(0)
        mask = torch.ones(1, rows.shape[0], dtype=torch.bool)
        return tokens, mask

    @staticmethod
    def _pad_tokens(
        rows_list: list[torch.Tensor],
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """Stack variable-length token matrices with a validity mask."""
        n_max = max(r.shape[0] for r in rows_list)
        d = rows_list[0].shape[1]
        tokens = torch.zeros(len(rows_list), n_max, d)
        mask = torch.zeros(len(rows_list), n_max, dtype=torch.bool)
        for i, rows in enumerate(rows_list):
            tokens[i, : rows.shape[0]] = rows
            mask[i, : rows.shape[0]] = True
        return tokens, mask

    # ----- forward process ----------------------------------------------

    def q_sample(
        self, x0: torch.Tensor, t: int, noise: torch.Tensor
    ) -> torch.Tensor:
        """x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) noise, 1 <= t <= T."""
        if not 1 <= t <= self.schedule.t_steps:
            raise ValidationError(f"t must lie in [1, {self.schedule.t_steps}]")
        ab = self.schedule.alpha_bar(t)
        return math.sqrt(ab) * x0 + math.sqrt(1.0 - ab) * noise

    # ----- prediction ----------------------------------------------------

    def predict_noise(
        self,
        x_t: torch.Tensor,
        t: int,
        outline: torch.Tensor,
        conditioning: Optional[ConditioningSet],
        hook: Optional[AttentionHook] = None,
    ) -> tuple[torch.Tensor, dict[str, torch.Tensor]]:
        """Masked noise prediction for one plan.

        x_t: (13, 64, 64); outline: (1, 64, 64) float. Returns the masked
        prediction and the cross-attention maps {site: (heads, HW, N)}.
        """
        maps: dict[str, torch.Tensor] = {}

        def recording_hook(site: str, probs: torch.Tensor) -> torch.Tensor:
            if hook is not None:
                probs = hook(site, probs)
            maps[site] = probs[0].detach()
            return probs

        tokens, token_mask = self._tokens(conditioning)
        outline_b = outline.unsqueeze(0)
        eps = self.network(
            (x_t * outline).unsqueeze(0),
            torch.tensor([t]),
            outline_b,
            tokens,
            token_mask,
            recording_hook,
        )
        return eps[0], maps

    # ----- training -------------------------------------------------------

    def train_step(
        self,
        batch: list[tuple[np.ndarray, OutlineMask, RoomsDocument]],
        rng: torch.Generator,
    ) -> float:
        """One optimizer update on (plan tensor, outline, document) triples.

        Per sample: t ~ U[1, T], noise masked to the outline, conditioning
        dropped to the null token with probability p_uncond; the loss is
        the mean squared error over interior pixels only.
        """
        if not batch:
            raise ValidationError("batch must be non-empty")
        self.network.train()
        self.conditioner.train()
        b = len(batch)
        x0 = torch.stack([torch.tensor(item[0], dtype=torch.float32) for item in batch])
        masks = torch.stack(
            [torch.tensor(item[1].grid, dtype=torch.float32) for item in batch]
        ).unsqueeze(1)
        t = torch.randint(1, self.schedule.t_steps + 1, (b,), generator=rng)
        noise = torch.randn(x0.shape, generator=rng) * masks
        ab = torch.tensor(
            self.schedule.alpha_bars[t.numpy()], dtype=torch.float32
        ).view(b, 1, 1, 1)
        x_t = ab.sqrt() * x0 + (1 - ab).sqrt() * noise
        drop = torch.rand(b, generator=rng) < self.p_uncond
        rows_list = [
            self.conditioner.null_token
            if drop[i]
            else self.condition(batch[i][2]).embeddings
            for i in range(b)
        ]
        tokens, token_mask = self._pad_tokens(rows_list)
        eps_hat = self.network(x_t * masks, t, masks, tokens, token_mask)
        sq = (eps_hat - noise) ** 2 * masks
        per_sample = sq.sum(dim=(1, 2, 3)) / (
            masks.sum(dim=(1, 2, 3)) * x0.shape[1]
        )
        loss = per_sample.mean()
        if not torch.isfinite(loss):
            raise RuntimeError(
                f"non-finite training loss {loss.item()!r}; batch size {b}, "
                f"t values {t.tolist()}"
            )
        self.optimizer.zero_grad()
        loss.backward()
        self.optimizer.step()
        return float(loss.detach())

    # ----- sampling --------------------------------------------------------

    def reverse_step(
        self,
        x: torch.Tensor,
        eps: torch.Tensor,
        t: int,
        t_prev: int,
        mask: torch.Tensor,
        gen: Optional[torch.Generator] = None,
    ) -> torch.Tensor:
        """One ancestral update from timestep t to t_prev (< t).

        Estimates x0 from the noise prediction, clamps it to the data
        range, and samples the posterior; at t_prev = 0 the posterior is
        the x0 estimate itself with zero variance. With the true noise
        this recovers x0 exactly from x1.
        """
        ab_t = self.schedule.alpha_bar(t)
        ab_prev = self.schedule.alpha_bar(t_prev)
        x0_hat = (x - math.sqrt(1.0 - ab_t) * eps) / math.sqrt(ab_t)
        x0_hat = x0_hat.clamp(-1.0, 1.0) * mask
        if t_prev == 0:
            return x0_hat
        beta_eff = 1.0 - ab_t / ab_prev
        mean = (
            math.sqrt(ab_prev) * beta_eff / (1.0 - ab_t) * x0_hat
            + math.sqrt(ab_t / ab_prev) * (1.0 - ab_prev) / (1.0 - ab_t) * x
        )
        sigma = math.sqrt(beta_eff * (1.0 - ab_prev) / (1.0 - ab_t))
        noise = torch.randn(x.shape, generator=gen)
        return mean + sigma * noise * mask

    def sample(
        self,
        req: SampleRequest,
        hook_factory: Optional[Callable[[int], AttentionHook]] = None,
    ) -> tuple[PlanGrid, AttentionStore]:
        """Seeded ancestral sampling masked to the outline.

        ``hook_factory(step)`` may supply a per-step attention hook (the
        editor's replacement mechanism); the recorded store always holds
        the maps actually used by the run.
        """
        if req.steps > self.schedule.t_steps:
            raise ValidationError("steps cannot exceed the training schedule")
        self.network.eval()
        self.conditioner.eval()
        gen = torch.Generator().manual_seed(req.seed)
        m = torch.tensor(req.outline.grid, dtype=torch.float32).unsqueeze(0)
        x = torch.randn(13, *m.shape[1:], generator=gen) * m
        pairs = self.schedule.strided_timesteps(req.steps)
        maps: dict[tuple[int, str], torch.Tensor] = {}
        with torch.no_grad():
            for s, (t, t_prev) in enumerate(pairs):
                step_hook = hook_factory(s) if hook_factory is not None else None
                eps_c, site_maps = self.predict_noise(
                    x, t, m, req.conditioning, hook=step_hook
                )
                eps_u, _ = self.predict_noise(x, t, m, None)
                eps = cfg_combine(eps_u, eps_c, req.guidance_scale)
                for site, probs in site_maps.items():
                    maps[(s, site)] = probs.clone()
                x = self.reverse_step(x, eps, t, t_prev, m, gen)
        grid = tensor_to_grid(x.numpy(), req.outline)
        store = AttentionStore(
            maps=maps,
            room_names=req.conditioning.room_names,
            seed=req.seed,
            steps=len(pairs),
            sites=self.network.attention_sites,
            guidance_scale=req.guidance_scale,
            outline=req.outline,
            fingerprint=req.conditioning.fingerprint(),
        )
        return grid, store

    # ----- persistence -------------------------------------------------------

    def save(self, path: str | Path) -> None:
        payload = {
            "format": CHECKPOINT_FORMAT,
            "palette_version": PALETTE_VERSION,
            "schedule": self.schedule.to_json_dict(),
            "unet_config": self.network.config.to_json_dict(),
            "graphormer_config": self.conditioner.config.to_json_dict(),
            "p_uncond": self.p_uncond,
            "network": self.network.state_dict(),
            "conditioner": self.conditioner.state_dict(),
        }
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        torch.save(payload, path)

    @classmethod
    def load(cls, path: str | Path, lr: float = 2e-4) -> "DiffusionEngine":
        payload = torch.load(path, map_location="cpu", weights_only=True)
        if payload.get("format") != CHECKPOINT_FORMAT:
            raise ValidationError(
                f"unsupported checkpoint format {payload.get('format')!r}"
            )
        network = DenoiserNetwork(UNetConfig.from_json_dict(payload["unet_config"]))
        network.load_state_dict(payload["network"])
        conditioner = GraphConditioner(
            GraphormerConfig(**payload["graphormer_config"])
        )
        conditioner.load_state_dict(payload["conditioner"])
        schedule = DiffusionSchedule.from_json_dict(payload["schedule"])
        return cls(
            network, conditioner, schedule,
            p_uncond=float(payload.get("p_uncond", 0.1)), lr=lr,
        )


def build_engine(
    base_width: int = 64,
    d_model: int = 256,
    t_steps: int = 1000,
    n_heads: int = 4,
    n_layers: int = 3,
    p_uncond: float = 0.1,
    lr: float = 2e-4,
    seed: Optional[int] = None,
) -> DiffusionEngine:
    """Fresh engine with the desk-scale defaults."""
    if seed is not None:
        torch.manual_seed(seed)
    network = DenoiserNetwork(UNetConfig(base_width=base_width, cond_dim=d_model,
                                         attn_heads=n_heads))
    conditioner = GraphConditioner(
        GraphormerConfig(d_model=d_model, n_heads=n_heads, n_layers=n_layers)
    )
    schedule = DiffusionSchedule.cosine(t_steps)
    return DiffusionEngine(network, conditioner, schedule, p_uncond=p_uncond, lr=lr)
