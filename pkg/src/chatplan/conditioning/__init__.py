from .embedder import AttributeEmbedder, attribute_indices
from .graphormer import (
    BiasedSelfAttention,
    ConditioningSet,
    GraphConditioner,
    GraphormerConfig,
    GraphormerLayer,
)

__all__ = [
    "AttributeEmbedder",
    "attribute_indices",
    "ConditioningSet",
    "GraphConditioner",
    "GraphormerConfig",
    "GraphormerLayer",
    "BiasedSelfAttention",
]
