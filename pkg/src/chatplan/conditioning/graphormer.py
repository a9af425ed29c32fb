"""Graph transformer over room nodes.

Room features start from attribute embeddings, get a degree (centrality)
embedding added, and pass through self-attention layers whose pre-softmax
logits carry a per-head bias looked up from shortest-path-distance buckets
plus a connected-pair edge term. The output rows are the conditioning
tokens of the diffusion model.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional

import torch
from torch import nn

from ..core.graph import RoomGraph
from ..core.types import RoomsDocument, ValidationError
from .embedder import AttributeEmbedder


@dataclass(frozen=True)
class GraphormerConfig:
    d_model: int = 256
    n_heads: int = 4
    n_layers: int = 3
    d_attr: int = 64
    ffn_dim: int = 512
    max_spd_bucket: int = 32  # also the max supported room count
    max_degree: int = 15

    def to_json_dict(self) -> dict:
        return {
            "d_model": self.d_model,
            "n_heads": self.n_heads,
            "n_layers": self.n_layers,
            "d_attr": self.d_attr,
            "ffn_dim": self.ffn_dim,
            "max_spd_bucket": self.max_spd_bucket,
            "max_degree": self.max_degree,
        }


@dataclass(frozen=True)
class ConditioningSet:
    """Per-room conditioning rows in canonical document order."""

    embeddings: torch.Tensor  # (N, d_model)
    room_names: tuple[str, ...]
    null_embedding: torch.Tensor  # (1, d_model), for unconditional passes

    def __post_init__(self) -> None:
        if self.embeddings.shape[0] != len(self.room_names) or not self.room_names:
            raise ValidationError("one embedding row per room required")

    @property
    def n_rooms(self) -> int:
        return len(self.room_names)

    def fingerprint(self) -> str:
        """Stable digest of names + embedding values; stored alongside
        attention maps so an edit can detect mismatched conditioning."""
        h = hashlib.sha256()
        h.update("\x1f".join(self.room_names).encode())
        h.update(
            self.embeddings.detach().cpu().to(torch.float32).numpy().tobytes()
        )
        return h.hexdigest()


class BiasedSelfAttention(nn.Module):
    """Multi-head self-attention with an additive pre-softmax bias."""

    def __init__(self, d_model: int, n_heads: int) -> None:
        super().__init__()
        if d_model % n_heads:
            raise ValidationError("d_model must be divisible by n_heads")
        self.n_heads = n_heads
        self.head_dim = d_model // n_heads
        self.q_proj = nn.Linear(d_model, d_model)
        self.k_proj = nn.Linear(d_model, d_model)
        self.v_proj = nn.Linear(d_model, d_model)
        self.out_proj = nn.Linear(d_model, d_model)

    def forward(
        self, x: torch.Tensor, bias: Optional[torch.Tensor]
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """x: (N, d_model); bias: (n_heads, N, N) or None.

        Returns (output rows, attention probabilities (n_heads, N, N)).
        """
        n = x.shape[0]
        q = self.q_proj(x).view(n, self.n_heads, self.head_dim).transpose(0, 1)
        k = self.k_proj(x).view(n, self.n_heads, self.head_dim).transpose(0, 1)
        v = self.v_proj(x).view(n, self.n_heads, self.head_dim).transpose(0, 1)
        scores = q @ k.transpose(1, 2) / self.head_dim**0.5
        if bias is not None:
            scores = scores + bias
        probs = torch.softmax(scores, dim=-1)
        out = (probs @ v).transpose(0, 1).reshape(n, -1)
        return self.out_proj(out), probs


class GraphormerLayer(nn.Module):
    """Pre-norm transformer layer; mirrors a standard encoder layer so the
    zero-bias case is checkable against torch's TransformerEncoderLayer."""

    def __init__(self, d_model: int, n_heads: int, ffn_dim: int) -> None:
        super().__init__()
        self.attn = BiasedSelfAttention(d_model, n_heads)
        self.norm1 = nn.LayerNorm(d_model)
        self.norm2 = nn.LayerNorm(d_model)
        self.linear1 = nn.Linear(d_model, ffn_dim)
        self.linear2 = nn.Linear(ffn_dim, d_model)

    def forward(
        self, x: torch.Tensor, bias: Optional[torch.Tensor]
    ) -> tuple[torch.Tensor, torch.Tensor]:
        attn_out, probs = self.attn(self.norm1(x), bias)
        x = x + attn_out
        x = x + self.linear2(torch.relu(self.linear1(self.norm2(x))))
        return x, probs


class GraphConditioner(nn.Module):
    """Attribute embeddings + centrality + biased attention -> conditioning."""

    def __init__(
        self,
        config: GraphormerConfig = GraphormerConfig(),
        attribute_encoder: Optional[nn.Module] = None,
    ) -> None:
        super().__init__()
        self.config = config
        self.embedder = attribute_encoder or AttributeEmbedder(
            d_attr=config.d_attr, d_model=config.d_model
        )
        self.degree_table = nn.Embedding(config.max_degree + 1, config.d_model)
        self.spatial_table = nn.Parameter(
            0.02 * torch.randn(config.n_heads, config.max_spd_bucket + 1)
        )
        self.edge_bias = nn.Parameter(0.02 * torch.randn(config.n_heads))
        self.layers = nn.ModuleList(
            GraphormerLayer(config.d_model, config.n_heads, config.ffn_dim)
            for _ in range(config.n_layers)
        )
        self.null_token = nn.Parameter(torch.randn(1, config.d_model))

    def embed_attributes(self, doc: RoomsDocument) -> torch.Tensor:
        return self.embedder(doc)

    def add_centrality(self, features: torch.Tensor, graph: RoomGraph) -> torch.Tensor:
        degrees = torch.as_tensor(graph.degree, dtype=torch.long,
                                  device=features.device)
        degrees = degrees.clamp(max=self.config.max_degree)
        return features + self.degree_table(degrees)

    def spatial_attention_bias(self, graph: RoomGraph) -> torch.Tensor:
        """(n_heads, N, N) additive bias from SPD buckets + edge term."""
        spd = torch.as_tensor(graph.spd, dtype=torch.long,
                              device=self.spatial_table.device)
        buckets = spd.clamp(max=self.config.max_spd_bucket)
        bias = self.spatial_table[:, buckets]
        edge = (spd == 1).to(bias.dtype)
        return bias + self.edge_bias.view(-1, 1, 1) * edge

    def forward(
        self,
        doc: RoomsDocument,
        graph: RoomGraph,
        return_attention: bool = False,
    ):
        if graph.n != len(doc.rooms):
            raise ValidationError("graph size does not match document")
        x = self.add_centrality(self.embed_attributes(doc), graph)
        bias = self.spatial_attention_bias(graph)
        attention: list[torch.Tensor] = []
        for layer in self.layers:
            x, probs = layer(x, bias)
            attention.append(probs)
        conditioning = ConditioningSet(
            embeddings=x,
            room_names=doc.names,
            null_embedding=self.null_token,
        )
        if return_attention:
            return conditioning, attention
        return conditioning
