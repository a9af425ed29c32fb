"""Shared independent oracles used by unit and acceptance tests."""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from chatplan.conditioning import GraphConditioner


def plain_transformer_oracle(model: GraphConditioner) -> nn.ModuleList:
    """torch.nn.TransformerEncoderLayer stack carrying the model's weights.

    Independent attention/FFN implementation for the zero-bias equivalence
    check.
    """
    cfg = model.config
    layers = nn.ModuleList()
    for layer in model.layers:
        ref = nn.TransformerEncoderLayer(
            d_model=cfg.d_model,
            nhead=cfg.n_heads,
            dim_feedforward=cfg.ffn_dim,
            dropout=0.0,
            activation="relu",
            batch_first=True,
            norm_first=True,
        )
        with torch.no_grad():
            ref.self_attn.in_proj_weight.copy_(
                torch.cat(
                    [
                        layer.attn.q_proj.weight,
                        layer.attn.k_proj.weight,
                        layer.attn.v_proj.weight,
                    ]
                )
            )
            ref.self_attn.in_proj_bias.copy_(
                torch.cat(
                    [
                        layer.attn.q_proj.bias,
                        layer.attn.k_proj.bias,
                        layer.attn.v_proj.bias,
                    ]
                )
            )
            ref.self_attn.out_proj.weight.copy_(layer.attn.out_proj.weight)
            ref.self_attn.out_proj.bias.copy_(layer.attn.out_proj.bias)
            ref.linear1.weight.copy_(layer.linear1.weight)
            ref.linear1.bias.copy_(layer.linear1.bias)
            ref.linear2.weight.copy_(layer.linear2.weight)
            ref.linear2.bias.copy_(layer.linear2.bias)
            ref.norm1.weight.copy_(layer.norm1.weight)
            ref.norm1.bias.copy_(layer.norm1.bias)
            ref.norm2.weight.copy_(layer.norm2.weight)
            ref.norm2.bias.copy_(layer.norm2.bias)
        layers.append(ref)
    layers.eval()
    return layers


def run_plain_oracle(layers: nn.ModuleList, x: torch.Tensor) -> torch.Tensor:
    y = x.unsqueeze(0)
    with torch.no_grad():
        for layer in layers:
            y = layer(y)
    return y.squeeze(0)


def central_difference_grads(
    loss_fn, params: list[torch.Tensor], entries_per_param: int = 8,
    h: float = 1e-6, rng_seed: int = 0,
) -> list[tuple[torch.Tensor, float, float]]:
    """(param, analytic, numeric) triples on sampled entries of each param.

    loss_fn must be deterministic; params must be float64 leaves.
    """
    loss = loss_fn()
    grads = torch.autograd.grad(loss, params, allow_unused=False)
    rng = np.random.default_rng(rng_seed)
    out = []
    for p, g in zip(params, grads):
        flat = p.detach().reshape(-1)
        count = min(entries_per_param, flat.numel())
        idx = rng.choice(flat.numel(), size=count, replace=False)
        for k in idx:
            orig = flat[k].item()
            with torch.no_grad():
                flat[k] = orig + h
            plus = loss_fn().item()
            with torch.no_grad():
                flat[k] = orig - h
            minus = loss_fn().item()
            with torch.no_grad():
                flat[k] = orig
            numeric = (plus - minus) / (2 * h)
            analytic = g.reshape(-1)[k].item()
            out.append((p, analytic, numeric))
    return out


def assert_grads_close(triples, rel_tol: float = 1e-3, abs_floor: float = 1e-7):
    for _, analytic, numeric in triples:
        scale = max(abs(analytic), abs(numeric), abs_floor)
        assert abs(analytic - numeric) <= rel_tol * scale + abs_floor, (
            f"gradient mismatch: analytic={analytic!r} numeric={numeric!r}"
        )
