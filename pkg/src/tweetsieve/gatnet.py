"""Graph attention embedder with a contrastive training objective.

Two stacked attention layers score each neighbor through a shared linear
map followed by LeakyReLU and a learned attention vector, normalize the
scores per neighborhood, and aggregate transformed neighbor features.
Training minimizes the sum of a triplet hinge and a pairwise hinge over
event-labeled tweets; gradients are fully analytic.
"""

from __future__ import annotations

import copy
import json
import struct
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import DataValidationError, NumericalError
from .trg import NodeFeatures, TweetRelationGraph

CHECKPOINT_MAGIC = b"TWZP"
CHECKPOINT_VERSION = 1

DEFAULT_EMBED_DIM = 256
DEFAULT_LEAKY_SLOPE = 0.2


@dataclass
class LayerParams:
    """One attention layer: per-head self/neighbor maps plus score vector."""

    w_self: np.ndarray  # (heads, d_out, d_in)
    w_neigh: np.ndarray  # (heads, d_out, d_in)
    attn: np.ndarray  # (heads, d_out)
    leaky_slope: float = DEFAULT_LEAKY_SLOPE

    @property
    def heads(self) -> int:
        return self.w_self.shape[0]

    @property
    def d_in(self) -> int:
        return self.w_self.shape[2]

    @property
    def d_out(self) -> int:
        return self.w_self.shape[1]

    def tensors(self) -> list[np.ndarray]:
        return [self.w_self, self.w_neigh, self.attn]


@dataclass
class GatParams:
    layers: list[LayerParams]

    @property
    def embed_dim(self) -> int:
        return self.layers[-1].d_out

    @property
    def in_dim(self) -> int:
        return self.layers[0].d_in

    def tensors(self) -> list[np.ndarray]:
        out = []
        for layer in self.layers:
            out.extend(layer.tensors())
        return out

    def check_finite(self) -> None:
        for t in self.tensors():
            if not np.isfinite(t).all():
                raise NumericalError("non-finite model parameter")


@dataclass
class TrainConfig:
    learning_rate: float = 0.003
    margin: float = 100.0
    patience: int = 2
    max_epochs: int = 200
    seed: int = 0
    triplet_weight: float = 1.0
    pairwise_weight: float = 1.0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise DataValidationError("learning_rate must be positive")
        if self.margin < 0:
            raise DataValidationError("margin must be non-negative")
        if self.patience < 0:
            raise DataValidationError("patience must be non-negative")


def init_params(
    in_dim: int,
    embed_dim: int = DEFAULT_EMBED_DIM,
    n_layers: int = 2,
    heads: int = 1,
    leaky_slope: float = DEFAULT_LEAKY_SLOPE,
    rng: Optional[np.random.Generator] = None,
) -> GatParams:
    """Glorot-uniform initialization; hidden width equals the output width."""
    rng = rng or np.random.default_rng(0)
    layers = []
    d_in = in_dim
    for _ in range(n_layers):
        bound = np.sqrt(6.0 / (d_in + embed_dim))
        w_self = rng.uniform(-bound, bound, size=(heads, embed_dim, d_in))
        w_neigh = rng.uniform(-bound, bound, size=(heads, embed_dim, d_in))
        a_bound = np.sqrt(6.0 / (embed_dim + 1))
        attn = rng.uniform(-a_bound, a_bound, size=(heads, embed_dim))
        layers.append(
            LayerParams(w_self=w_self, w_neigh=w_neigh, attn=attn, leaky_slope=leaky_slope)
        )
        d_in = embed_dim * heads  # heads concatenate between layers
    return GatParams(layers=layers)


def _elu(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0.0, x, np.expm1(x))


def _elu_grad(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0.0, 1.0, np.exp(x))


def _check_graph(graph: TweetRelationGraph) -> None:
    if (np.diff(graph.indptr) == 0).any():
        raise DataValidationError(
            "node with empty neighborhood; build the graph with self-loops"
        )


def _features_matrix(features) -> np.ndarray:
    mat = features.matrix if isinstance(features, NodeFeatures) else np.asarray(features)
    return np.ascontiguousarray(mat, dtype=np.float64)


def gat_forward(
    graph: TweetRelationGraph,
    features,
    params: GatParams,
    return_cache: bool = False,
):
    """Embed every node; deterministic given inputs.

    Hidden layers concatenate head outputs and pass through ELU; the final
    layer averages heads and stays linear.
    """
    _check_graph(graph)
    x = _features_matrix(features)
    if x.shape[0] != graph.n:
        raise DataValidationError(f"feature rows {x.shape[0]} != graph nodes {graph.n}")
    if x.shape[1] != params.in_dim:
        raise DataValidationError(
            f"feature dim {x.shape[1]} does not match layer-0 input dim {params.in_dim}"
        )
    cache = []
    n_layers = len(params.layers)
    for li, layer in enumerate(params.layers):
        last = li == n_layers - 1
        head_outs, head_cache = [], []
        for h in range(layer.heads):
            z_self = x @ layer.w_self[h].T
            z_neigh = x @ layer.w_neigh[h].T
            out, alpha = kernels.gat_edge_forward(
                graph.indptr, graph.indices, z_self, z_neigh, layer.attn[h], layer.leaky_slope
            )
            head_outs.append(out)
            if return_cache:
                head_cache.append({"z_self": z_self, "z_neigh": z_neigh, "alpha": alpha})
        if last:
            pre = head_outs[0] if layer.heads == 1 else np.mean(head_outs, axis=0)
            nxt = pre
        else:
            pre = head_outs[0] if layer.heads == 1 else np.concatenate(head_outs, axis=1)
            nxt = _elu(pre)
        if return_cache:
            cache.append({"x": x, "pre": pre, "heads": head_cache})
        x = nxt
    if not np.isfinite(x).all():
        raise NumericalError("non-finite embedding output")
    if return_cache:
        return x, cache
    return x


def gat_backward(
    graph: TweetRelationGraph,
    params: GatParams,
    cache: list[dict],
    d_embed: np.ndarray,
) -> list[LayerParams]:
    """Analytic gradients for every layer given d(loss)/d(embedding)."""
    grads = [
        LayerParams(
            w_self=np.zeros_like(l.w_self),
            w_neigh=np.zeros_like(l.w_neigh),
            attn=np.zeros_like(l.attn),
            leaky_slope=l.leaky_slope,
        )
        for l in params.layers
    ]
    n_layers = len(params.layers)
    dx_next = d_embed
    for li in range(n_layers - 1, -1, -1):
        layer = params.layers[li]
        entry = cache[li]
        x = entry["x"]
        if li == n_layers - 1:
            dpre = dx_next
        else:
            dpre = dx_next * _elu_grad(entry["pre"])
        dx = np.zeros_like(x)
        for h in range(layer.heads):
            if li == n_layers - 1:
                dout_h = dpre if layer.heads == 1 else dpre / layer.heads
            else:
                d_out = layer.d_out
                dout_h = dpre[:, h * d_out : (h + 1) * d_out]
            hc = entry["heads"][h]
            dz_self, dz_neigh, dattn = kernels.gat_edge_backward(
                graph.indptr,
                graph.indices,
                hc["z_self"],
                hc["z_neigh"],
                layer.attn[h],
                layer.leaky_slope,
                hc["alpha"],
                np.ascontiguousarray(dout_h),
            )
            grads[li].w_self[h] += dz_self.T @ x
            grads[li].w_neigh[h] += dz_neigh.T @ x
            grads[li].attn[h] += dattn
            dx += dz_self @ layer.w_self[h] + dz_neigh @ layer.w_neigh[h]
        dx_next = dx
    return grads


def attention_weights(
    node: int,
    graph: TweetRelationGraph,
    features,
    layer: LayerParams,
    head: int = 0,
) -> np.ndarray:
    """Softmax attention of one node over its neighbor list at one layer.

    ``features`` is the layer's input matrix (the raw node features for
    the first layer). Computed with max-subtraction for stability.
    """
    _check_graph(graph)
    x = _features_matrix(features)
    neigh = graph.neighbors(node)
    z_self_v = layer.w_self[head] @ x[node]
    scores = np.empty(len(neigh))
    for j, u in enumerate(neigh):
        s = z_self_v + layer.w_neigh[head] @ x[u]
        r = np.where(s > 0.0, s, layer.leaky_slope * s)
        scores[j] = layer.attn[head] @ r
    scores -= scores.max()
    ex = np.exp(scores)
    return ex / ex.sum()


# ---------------------------------------------------------------------------
# Contrastive objective
# ---------------------------------------------------------------------------


def _check_same_dim(*vecs) -> None:
    dims = {np.asarray(v).shape for v in vecs}
    if len(dims) != 1:
        raise DataValidationError(f"vector dimension mismatch: {sorted(dims)}")


def triplet_loss(anchor, positive, negative, margin: float) -> float:
    """Hinge on (anchor-positive distance) - (anchor-negative distance)."""
    _check_same_dim(anchor, positive, negative)
    a, p, n = (np.asarray(v, dtype=np.float64) for v in (anchor, positive, negative))
    return float(max(np.linalg.norm(a - p) - np.linalg.norm(a - n) + margin, 0.0))


def pairwise_loss(hi, hi_pos, hj, hk, margin: float) -> float:
    """Hinge on (intra-event pair distance) - (inter-event pair distance)."""
    _check_same_dim(hi, hi_pos, hj, hk)
    a, b, c, d = (np.asarray(v, dtype=np.float64) for v in (hi, hi_pos, hj, hk))
    return float(max(np.linalg.norm(a - b) - np.linalg.norm(c - d) + margin, 0.0))


@dataclass
class TripleBatch:
    """Sampled index sets: one triplet and one pairwise quadruple per anchor."""

    anchors: np.ndarray
    positives: np.ndarray
    negatives: np.ndarray
    pw_i: np.ndarray
    pw_ipos: np.ndarray
    pw_j: np.ndarray
    pw_k: np.ndarray

    def all_indices(self) -> np.ndarray:
        return np.concatenate(
            [self.anchors, self.positives, self.negatives, self.pw_i, self.pw_ipos, self.pw_j, self.pw_k]
        )


def group_by_event(labels: Sequence[Optional[str]]) -> dict[str, list[int]]:
    groups: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        if lab is not None:
            groups.setdefault(lab, []).append(i)
    return groups


def sample_triple_batch(labels: Sequence[Optional[str]], rng: np.random.Generator) -> TripleBatch:
    """One triplet and one pairwise quadruple anchored at each eligible tweet.

    Positives come uniformly from the anchor's event; negatives uniformly
    from other events. The quadruple's cross pair uses two distinct events
    other than the anchor's when at least two exist, otherwise any two
    distinct events.
    """
    groups = group_by_event(labels)
    events = sorted(groups)
    multi = [e for e in events if len(groups[e]) >= 2]
    if len(events) < 2 or not multi:
        raise DataValidationError(
            "need >=2 labeled events and >=1 event with >=2 tweets to sample triples"
        )
    anchors, positives, negatives = [], [], []
    pw_i, pw_ipos, pw_j, pw_k = [], [], [], []
    for event in multi:
        members = groups[event]
        other_events = [e for e in events if e != event]
        pool_other = [i for e in other_events for i in groups[e]]
        for a in members:
            rest = [i for i in members if i != a]
            p = rest[rng.integers(len(rest))]
            ng = pool_other[rng.integers(len(pool_other))]
            anchors.append(a)
            positives.append(p)
            negatives.append(ng)
            if len(other_events) >= 2:
                picked = rng.choice(len(other_events), size=2, replace=False)
                ev_j, ev_k = other_events[picked[0]], other_events[picked[1]]
            else:
                picked = rng.choice(len(events), size=2, replace=False)
                ev_j, ev_k = events[picked[0]], events[picked[1]]
            pw_i.append(a)
            pw_ipos.append(p)
            pw_j.append(groups[ev_j][rng.integers(len(groups[ev_j]))])
            pw_k.append(groups[ev_k][rng.integers(len(groups[ev_k]))])
    return TripleBatch(
        anchors=np.asarray(anchors, dtype=np.int64),
        positives=np.asarray(positives, dtype=np.int64),
        negatives=np.asarray(negatives, dtype=np.int64),
        pw_i=np.asarray(pw_i, dtype=np.int64),
        pw_ipos=np.asarray(pw_ipos, dtype=np.int64),
        pw_j=np.asarray(pw_j, dtype=np.int64),
        pw_k=np.asarray(pw_k, dtype=np.int64),
    )


def total_loss(
    batch: TripleBatch,
    embeddings: np.ndarray,
    cfg: TrainConfig,
    labels: Optional[Sequence[Optional[str]]] = None,
) -> float:
    """Weighted mean triplet term plus weighted mean pairwise term."""
    if labels is not None:
        for idx in batch.all_indices():
            if labels[idx] is None:
                raise DataValidationError(f"batch references unlabeled tweet index {idx}")
    emb = np.asarray(embeddings, dtype=np.float64)
    t_terms = [
        triplet_loss(emb[a], emb[p], emb[n], cfg.margin)
        for a, p, n in zip(batch.anchors, batch.positives, batch.negatives)
    ]
    p_terms = [
        pairwise_loss(emb[i], emb[ip], emb[j], emb[k], cfg.margin)
        for i, ip, j, k in zip(batch.pw_i, batch.pw_ipos, batch.pw_j, batch.pw_k)
    ]
    total = 0.0
    if t_terms:
        total += cfg.triplet_weight * float(np.mean(t_terms))
    if p_terms:
        total += cfg.pairwise_weight * float(np.mean(p_terms))
    return total


def _norm_grad(diff: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(diff)
    if norm == 0.0:
        return np.zeros_like(diff)
    return diff / norm


def loss_embedding_grad(batch: TripleBatch, embeddings: np.ndarray, cfg: TrainConfig) -> np.ndarray:
    """d(total_loss)/d(embedding rows); inactive hinges contribute zero."""
    emb = np.asarray(embeddings, dtype=np.float64)
    grad = np.zeros_like(emb)
    n_t = len(batch.anchors)
    if n_t:
        w = cfg.triplet_weight / n_t
        for a, p, ng in zip(batch.anchors, batch.positives, batch.negatives):
            d_ap = emb[a] - emb[p]
            d_an = emb[a] - emb[ng]
            if np.linalg.norm(d_ap) - np.linalg.norm(d_an) + cfg.margin > 0.0:
                g_ap = _norm_grad(d_ap)
                g_an = _norm_grad(d_an)
                grad[a] += w * (g_ap - g_an)
                grad[p] -= w * g_ap
                grad[ng] += w * g_an
    n_p = len(batch.pw_i)
    if n_p:
        w = cfg.pairwise_weight / n_p
        for i, ip, j, k in zip(batch.pw_i, batch.pw_ipos, batch.pw_j, batch.pw_k):
            d_ii = emb[i] - emb[ip]
            d_jk = emb[j] - emb[k]
            if np.linalg.norm(d_ii) - np.linalg.norm(d_jk) + cfg.margin > 0.0:
                g_ii = _norm_grad(d_ii)
                g_jk = _norm_grad(d_jk)
                grad[i] += w * g_ii
                grad[ip] -= w * g_ii
                grad[j] -= w * g_jk
                grad[k] += w * g_jk
    return grad


def loss_and_grads(
    graph: TweetRelationGraph,
    features,
    params: GatParams,
    batch: TripleBatch,
    cfg: TrainConfig,
):
    """Loss value plus analytic parameter gradients in one pass."""
    emb, cache = gat_forward(graph, features, params, return_cache=True)
    loss = total_loss(batch, emb, cfg)
    d_emb = loss_embedding_grad(batch, emb, cfg)
    grads = gat_backward(graph, params, cache, d_emb)
    return loss, grads


class _Adam:
    def __init__(self, tensors: list[np.ndarray], lr: float, b1=0.9, b2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m = [np.zeros_like(t) for t in tensors]
        self.v = [np.zeros_like(t) for t in tensors]
        self.t = 0

    def step(self, tensors: list[np.ndarray], grads: list[np.ndarray]) -> None:
        self.t += 1
        c1 = 1.0 - self.b1**self.t
        c2 = 1.0 - self.b2**self.t
        for i, (tensor, g) in enumerate(zip(tensors, grads)):
            self.m[i] = self.b1 * self.m[i] + (1 - self.b1) * g
            self.v[i] = self.b2 * self.v[i] + (1 - self.b2) * g * g
            tensor -= self.lr * (self.m[i] / c1) / (np.sqrt(self.v[i] / c2) + self.eps)


def train(
    graph: TweetRelationGraph,
    features,
    labels: Sequence[Optional[str]],
    cfg: TrainConfig,
    *,
    val_graph: TweetRelationGraph,
    val_features,
    val_labels: Sequence[Optional[str]],
    embed_dim: int = DEFAULT_EMBED_DIM,
    n_layers: int = 2,
    heads: int = 1,
    leaky_slope: float = DEFAULT_LEAKY_SLOPE,
):
    """Adam training with early stopping on validation loss.

    Triples are re-sampled each epoch from the run seed; the validation
    batch is sampled once so the early-stopping monitor is comparable
    across epochs. Returns the best-validation parameters and a per-epoch
    log (train loss, validation loss).
    """
    groups = group_by_event(labels)
    multi = [e for e in groups.values() if len(e) >= 2]
    if len(groups) < 2 or len(multi) < 2:
        raise DataValidationError(
            "training split needs >=2 labeled events with >=2 tweets each"
        )
    if not group_by_event(val_labels):
        raise DataValidationError("validation split has no labeled events")

    x = _features_matrix(features)
    rng = np.random.default_rng(cfg.seed)
    params = init_params(
        in_dim=x.shape[1],
        embed_dim=embed_dim,
        n_layers=n_layers,
        heads=heads,
        leaky_slope=leaky_slope,
        rng=rng,
    )
    val_batch = sample_triple_batch(val_labels, rng)

    def validation_loss() -> float:
        val_emb = gat_forward(val_graph, val_features, params)
        return total_loss(val_batch, val_emb, cfg)

    opt = _Adam(params.tensors(), cfg.learning_rate)
    best_val = validation_loss()
    best_params = copy.deepcopy(params)
    bad_epochs = 0
    log = [{"epoch": -1, "train_loss": None, "val_loss": best_val}]
    for epoch in range(cfg.max_epochs):
        batch = sample_triple_batch(labels, rng)
        loss, grads = loss_and_grads(graph, x, params, batch, cfg)
        if not np.isfinite(loss):
            raise NumericalError(f"non-finite training loss at epoch {epoch}")
        flat_grads = []
        for g in grads:
            flat_grads.extend(g.tensors())
        opt.step(params.tensors(), flat_grads)
        params.check_finite()
        vloss = validation_loss()
        if not np.isfinite(vloss):
            raise NumericalError(f"non-finite validation loss at epoch {epoch}")
        log.append({"epoch": epoch, "train_loss": loss, "val_loss": vloss})
        if vloss < best_val:
            best_val = vloss
            best_params = copy.deepcopy(params)
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs > cfg.patience:
                break
    return best_params, log


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


def save_checkpoint(params: GatParams, path) -> None:
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", CHECKPOINT_VERSION, len(params.layers)))
        for layer in params.layers:
            fh.write(
                struct.pack(
                    "<IIIf", layer.heads, layer.d_in, layer.d_out, layer.leaky_slope
                )
            )
            fh.write(layer.w_self.astype("<f4").tobytes(order="C"))
            fh.write(layer.w_neigh.astype("<f4").tobytes(order="C"))
            fh.write(layer.attn.astype("<f4").tobytes(order="C"))


def load_checkpoint(path) -> GatParams:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise DataValidationError(f"{path}: bad checkpoint magic {magic!r}")
        version, n_layers = struct.unpack("<II", fh.read(8))
        if version != CHECKPOINT_VERSION:
            raise DataValidationError(f"{path}: unsupported checkpoint version {version}")
        layers = []
        for _ in range(n_layers):
            heads, d_in, d_out, slope = struct.unpack("<IIIf", fh.read(16))
            w_self = np.frombuffer(fh.read(4 * heads * d_out * d_in), dtype="<f4")
            w_neigh = np.frombuffer(fh.read(4 * heads * d_out * d_in), dtype="<f4")
            attn = np.frombuffer(fh.read(4 * heads * d_out), dtype="<f4")
            layers.append(
                LayerParams(
                    w_self=w_self.reshape(heads, d_out, d_in).astype(np.float64),
                    w_neigh=w_neigh.reshape(heads, d_out, d_in).astype(np.float64),
                    attn=attn.reshape(heads, d_out).astype(np.float64),
                    leaky_slope=float(slope),
                )
            )
    return GatParams(layers=layers)


def save_training_log(log: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in log:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
