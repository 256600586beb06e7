"""Relevance matching network: per-term MLP scores aggregated by softmax gating.

Each query term's histogram passes through a small feed-forward network
(num_bins -> 5 tanh -> 5 tanh -> 1 linear). A gating vector w_g turns the
per-term inputs x_i (term embedding, or a 1-d idf value) into importance
weights g_i = exp(w_g . x_i) / sum_j exp(w_g . x_j); the query-unit score is
sum_i g_i * z_i. Training minimizes a pairwise hinge loss between a more and
a less relevant unit for the same query; `backward` returns the exact
analytic gradient, including the softmax path shared by both units.

The output layer is deliberately linear: scores only feed a dot product and
the hinge margin, so squashing them buys nothing.
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass

import numpy as np

from .histogram import HistogramConfig

HIDDEN_SIZE = 5
PARAM_FIELDS = ("w1", "b1", "w2", "b2", "w3", "b3", "w_g")

GATING_EMBEDDING = "embedding"
GATING_IDF = "idf"
GATING_VARIANTS = (GATING_EMBEDDING, GATING_IDF)

MODEL_MAGIC = "searchlight-model"
MODEL_VERSION = 1


@dataclass
class ModelParams:
    """All trainable arrays. Doubles as the container for gradients."""

    w1: np.ndarray  # (num_bins, 5)
    b1: np.ndarray  # (5,)
    w2: np.ndarray  # (5, 5)
    b2: np.ndarray  # (5,)
    w3: np.ndarray  # (5,)
    b3: np.ndarray  # () scalar kept as 0-d array so updates stay uniform
    w_g: np.ndarray  # (gating_dim,)

    @property
    def num_bins(self) -> int:
        return self.w1.shape[0]

    @property
    def gating_dim(self) -> int:
        return self.w_g.shape[0]

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_FIELDS}

    def copy(self) -> "ModelParams":
        return ModelParams(*(getattr(self, name).copy() for name in PARAM_FIELDS))

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(getattr(self, name))) for name in PARAM_FIELDS)


def zeros_like_params(params: ModelParams) -> ModelParams:
    return ModelParams(*(np.zeros_like(getattr(params, name)) for name in PARAM_FIELDS))


def init_params(num_bins: int, gating_dim: int, seed: int = 0) -> ModelParams:
    """Seeded uniform(-r, r) weights with r = sqrt(6 / (fan_in + fan_out)); zero biases.

    Draw order is fixed (w1, w2, w3, w_g) so a seed pins every value.
    """
    rng = np.random.Generator(np.random.PCG64(seed))

    def draw(fan_in, fan_out, shape):
        r = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-r, r, size=shape)

    return ModelParams(
        w1=draw(num_bins, HIDDEN_SIZE, (num_bins, HIDDEN_SIZE)),
        b1=np.zeros(HIDDEN_SIZE),
        w2=draw(HIDDEN_SIZE, HIDDEN_SIZE, (HIDDEN_SIZE, HIDDEN_SIZE)),
        b2=np.zeros(HIDDEN_SIZE),
        w3=draw(HIDDEN_SIZE, 1, (HIDDEN_SIZE,)),
        b3=np.zeros(()),
        w_g=draw(gating_dim, 1, (gating_dim,)),
    )


def gating_weights(w_g: np.ndarray, term_inputs: np.ndarray) -> np.ndarray:
    """Softmax term importances g_i = exp(w_g . x_i) / sum_j exp(w_g . x_j).

    Computed with max-subtraction so large logits cannot overflow; the shift
    cancels exactly, leaving the softmax value unchanged.
    """
    x = np.atleast_2d(np.asarray(term_inputs, dtype=np.float64))
    if x.shape[0] < 1:
        raise ValueError("need at least one query term")
    logits = x @ np.asarray(w_g, dtype=np.float64)
    shifted = np.exp(logits - logits.max())
    return shifted / shifted.sum()


def _mlp(params: ModelParams, histograms: np.ndarray):
    h = np.atleast_2d(np.asarray(histograms, dtype=np.float64))
    h1 = np.tanh(h @ params.w1 + params.b1)
    h2 = np.tanh(h1 @ params.w2 + params.b2)
    z = h2 @ params.w3 + params.b3
    return h, h1, h2, z


def forward(
    params: ModelParams, histograms: np.ndarray, gating_inputs: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Score one unit: returns (score, per_term_scores z, gating weights g)."""
    _, _, _, z = _mlp(params, histograms)
    g = gating_weights(params.w_g, gating_inputs)
    if g.shape[0] != z.shape[0]:
        raise ValueError("histogram count and gating input count differ")
    return float(g @ z), z, g


def hinge_loss(s_pos, s_neg):
    """Pairwise hinge max(0, 1 - s_pos + s_neg).

    Integer constants keep exact-arithmetic inputs (fractions.Fraction)
    exact, so "zero iff margin >= 1" holds without float slop at the
    boundary.
    """
    return max(0, 1 - s_pos + s_neg)


@dataclass
class TrainingPair:
    """One preference example: unit pos outranks unit neg for query_id.

    Histograms are (M, num_bins); gating_inputs are (M, gating_dim) and are
    shared by both units because gating depends only on the query.
    """

    query_id: str
    pos_unit_id: str
    neg_unit_id: str
    pos_histograms: np.ndarray
    neg_histograms: np.ndarray
    gating_inputs: np.ndarray


def backward(params: ModelParams, pair: TrainingPair) -> tuple[float, ModelParams]:
    """Loss and exact analytic gradient of hinge(forward(pos), forward(neg)).

    Gradients flow through both units' MLP passes and through the shared
    softmax: dL/dg_i = z_neg_i - z_pos_i, and per logit
    dL/dlogit_j = g_j * (dL/dg_j - sum_i dL/dg_i * g_i). In the hinge's flat
    region every gradient is zero.
    """
    x = np.atleast_2d(np.asarray(pair.gating_inputs, dtype=np.float64))
    g = gating_weights(params.w_g, x)
    hp, h1p, h2p, zp = _mlp(params, pair.pos_histograms)
    hn, h1n, h2n, zn = _mlp(params, pair.neg_histograms)
    s_pos = float(g @ zp)
    s_neg = float(g @ zn)
    loss = hinge_loss(s_pos, s_neg)

    grads = zeros_like_params(params)
    if loss <= 0:
        return 0.0, grads

    # dL/ds_pos = -1 and dL/ds_neg = +1, so dL/dz is -g and +g respectively.
    _mlp_backward(params, grads, hp, h1p, h2p, -g)
    _mlp_backward(params, grads, hn, h1n, h2n, g)

    dg = zn - zp
    dlogits = g * (dg - float(dg @ g))
    grads.w_g += x.T @ dlogits
    return float(loss), grads


def _mlp_backward(params, grads, h, h1, h2, dz):
    grads.w3 += h2.T @ dz
    grads.b3 += dz.sum()
    da2 = np.outer(dz, params.w3) * (1.0 - h2 * h2)
    grads.w2 += h1.T @ da2
    grads.b2 += da2.sum(axis=0)
    da1 = (da2 @ params.w2.T) * (1.0 - h1 * h1)
    grads.w1 += h.T @ da1
    grads.b1 += da1.sum(axis=0)


# -- persistence -------------------------------------------------------------


def save_model(path: str, params: ModelParams, cfg: HistogramConfig, gating: str) -> None:
    """Write a self-describing model file.

    JSON with sorted keys and fixed separators; arrays serialized as
    base64-encoded little-endian float64 C-order bytes. Identical params
    always produce identical bytes, which the training determinism contract
    relies on.
    """
    if gating not in GATING_VARIANTS:
        raise ValueError(f"unknown gating variant {gating!r}")
    arrays = {}
    for name, arr in params.arrays().items():
        data = np.ascontiguousarray(arr, dtype="<f8")
        arrays[name] = {
            "shape": list(arr.shape),
            "data": base64.b64encode(data.tobytes()).decode("ascii"),
        }
    payload = {
        "format": MODEL_MAGIC,
        "version": MODEL_VERSION,
        "histogram": {"num_bins": cfg.num_bins, "mode": cfg.mode},
        "gating": gating,
        "params": arrays,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_model(path: str) -> tuple[ModelParams, HistogramConfig, str]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != MODEL_MAGIC:
        raise ValueError(f"{path}: not a {MODEL_MAGIC} file")
    if payload.get("version") != MODEL_VERSION:
        raise ValueError(f"{path}: unsupported model version {payload.get('version')}")
    arrays = {}
    for name in PARAM_FIELDS:
        entry = payload["params"][name]
        flat = np.frombuffer(base64.b64decode(entry["data"]), dtype="<f8")
        arrays[name] = flat.reshape(entry["shape"]).astype(np.float64).copy()
    params = ModelParams(**arrays)
    if not params.all_finite():
        raise ValueError(f"{path}: model contains non-finite values")
    cfg = HistogramConfig(payload["histogram"]["num_bins"], payload["histogram"]["mode"])
    gating = payload["gating"]
    if gating not in GATING_VARIANTS:
        raise ValueError(f"{path}: unknown gating variant {gating!r}")
    return params, cfg, gating
