"""Cascaded cross-attention fusion of the encoded modality streams.

The ego encoding is the initial fused state.  Each cascade stage
normalizes the running fusion, uses it as queries against one other
stream's encoding (keys and values), and adds the result back:

    E_fused <- E_Y
    for E in others:
        E_fused <- MHA(LN(E_fused), E, E) + E_fused

Stages hold their own projections and norm; nothing is shared between
stages.  Stage order is fixed: neighbors first, then the scene stream.
"""
from ..autodiff import ops
from .layers import LayerNorm, MultiHeadAttention


class CascadeStage:
    def __init__(self, params, name, rng, d_model, n_heads):
        self.ln = LayerNorm(params, name + ".ln", d_model)
        self.attn = MultiHeadAttention(params, name + ".attn", rng, d_model, n_heads)


class CXAFusion:
    def __init__(self, params, name, rng, d_model, n_heads, n_stages):
        self.stages = [
            CascadeStage(params, "%s.stage%d" % (name, i), rng, d_model, n_heads)
            for i in range(n_stages)
        ]

    def __call__(self, e_y, others):
        return cascaded_cross_attention(self, e_y, others)


def cascaded_cross_attention(fusion, e_y, others):
    """Run the cascade; ``others`` is ordered [neighbors, scene].

    With an empty ``others`` the result is exactly ``e_y``.
    """
    if e_y.size == 0:
        raise ValueError("cascade needs a non-empty ego encoding")
    if len(others) != len(fusion.stages):
        raise ValueError(
            "cascade got %d extra streams but has %d stages"
            % (len(others), len(fusion.stages)))
    e_fused = e_y
    for stage, e in zip(fusion.stages, others):
        h = stage.ln(e_fused)
        e_fused = ops.add(stage.attn(h, e, e), e_fused)
    return e_fused
