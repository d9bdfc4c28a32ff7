"""Multi-label category tagging with per-label linear heads.

Seven fixed labels; five of them are security categories. Heads are
trained with summed per-label weighted binary cross-entropy over
precomputed text features and used both for the security gate in the
detection pipeline and for event category summaries.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DataValidationError, NumericalError

CATEGORY_LABELS = (
    "Non-security",
    "Uninformative",
    "Vulnerability",
    "Ransomware/Malware",
    "Data Privacy",
    "Fraud/Phishing",
    "DoS/DDoS",
)

# Labels that mark a tweet as security-relevant. A tweet tagged only with
# the other two never reaches the embedding stage.
SECURITY_LABELS = CATEGORY_LABELS[2:]

N_CATEGORIES = len(CATEGORY_LABELS)

PROB_CLAMP = 1e-7

_MODEL_MAGIC = b"TWZC"


def category_index(label: str) -> int:
    try:
        return CATEGORY_LABELS.index(label)
    except ValueError:
        raise DataValidationError(f"unknown category label: {label!r}") from None


def labels_to_matrix(label_sets, n_labels: int = N_CATEGORIES) -> np.ndarray:
    """Convert an iterable of label-name sets to an n x 7 binary matrix."""
    rows = []
    for labels in label_sets:
        row = np.zeros(n_labels, dtype=np.float64)
        for name in labels or ():
            row[category_index(name)] = 1.0
        rows.append(row)
    if not rows:
        return np.zeros((0, n_labels), dtype=np.float64)
    return np.stack(rows)


def matrix_to_labels(binary: np.ndarray) -> list[list[str]]:
    out = []
    for row in np.asarray(binary):
        out.append([CATEGORY_LABELS[j] for j in range(len(CATEGORY_LABELS)) if row[j]])
    return out


def _check_binary(mat: np.ndarray, name: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.float64)
    if not np.isin(mat, (0.0, 1.0)).all():
        raise DataValidationError(f"{name} must contain only 0/1 entries")
    return mat


def clamp_probs(prob: np.ndarray) -> np.ndarray:
    return np.clip(prob, PROB_CLAMP, 1.0 - PROB_CLAMP)


def category_loss(gold: np.ndarray, prob: np.ndarray, pos_weight: float = 0.8) -> float:
    """Summed per-category mean binary cross-entropy.

    The positive term of each cell is scaled by ``pos_weight``; both terms
    are negated. Probabilities are clamped away from {0,1} before the log.
    """
    gold = _check_binary(gold, "gold")
    prob = np.asarray(prob, dtype=np.float64)
    if gold.shape != prob.shape:
        raise DataValidationError(
            f"shape mismatch: gold {gold.shape} vs prob {prob.shape}"
        )
    p = clamp_probs(prob)
    n = gold.shape[0]
    per_cell = pos_weight * gold * np.log(p) + (1.0 - gold) * np.log(1.0 - p)
    return float(-per_cell.sum() / n)


def category_loss_grad(gold: np.ndarray, prob: np.ndarray, pos_weight: float = 0.8) -> np.ndarray:
    """Gradient of :func:`category_loss` with respect to each probability."""
    gold = _check_binary(gold, "gold")
    p = clamp_probs(np.asarray(prob, dtype=np.float64))
    n = gold.shape[0]
    return -(pos_weight * gold / p - (1.0 - gold) / (1.0 - p)) / n


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class CategorizerModel:
    """Per-category linear heads over a text-feature space."""

    weights: np.ndarray  # (n_labels, dim)
    biases: np.ndarray  # (n_labels,)
    labels: tuple[str, ...] = CATEGORY_LABELS
    pos_weight: float = 0.8
    threshold: float = 0.5
    trained_mask: np.ndarray = field(default=None)  # heads actually trained

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        if self.trained_mask is None:
            self.trained_mask = np.ones(self.weights.shape[0], dtype=bool)
        if not (np.isfinite(self.weights).all() and np.isfinite(self.biases).all()):
            raise NumericalError("categorizer weights are not finite")

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def probabilities(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != self.dim:
            raise DataValidationError(
                f"feature dim {features.shape} does not match model dim {self.dim}"
            )
        return clamp_probs(_sigmoid(features @ self.weights.T + self.biases))

    def save(self, path) -> None:
        header = {
            "dim": int(self.dim),
            "labels": list(self.labels),
            "threshold": self.threshold,
            "pos_weight": self.pos_weight,
            "trained": [bool(x) for x in self.trained_mask],
        }
        with open(path, "wb") as fh:
            fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
            fh.write(b"\n")
            fh.write(_MODEL_MAGIC)
            fh.write(struct.pack("<III", 1, self.weights.shape[0], self.weights.shape[1]))
            fh.write(self.weights.astype("<f4").tobytes(order="C"))
            fh.write(self.biases.astype("<f4").tobytes())

    @classmethod
    def load(cls, path) -> "CategorizerModel":
        with open(path, "rb") as fh:
            header_line = fh.readline()
            try:
                header = json.loads(header_line.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise DataValidationError(f"bad categorizer header in {path}: {exc}") from exc
            magic = fh.read(4)
            if magic != _MODEL_MAGIC:
                raise DataValidationError(f"bad categorizer magic in {path}: {magic!r}")
            version, n_labels, dim = struct.unpack("<III", fh.read(12))
            if version != 1:
                raise DataValidationError(f"unsupported categorizer version {version}")
            w = np.frombuffer(fh.read(4 * n_labels * dim), dtype="<f4").reshape(n_labels, dim)
            b = np.frombuffer(fh.read(4 * n_labels), dtype="<f4")
        if header["dim"] != dim or len(header["labels"]) != n_labels:
            raise DataValidationError(f"categorizer header/body mismatch in {path}")
        return cls(
            weights=w.astype(np.float64),
            biases=b.astype(np.float64),
            labels=tuple(header["labels"]),
            pos_weight=float(header["pos_weight"]),
            threshold=float(header["threshold"]),
            trained_mask=np.asarray(header["trained"], dtype=bool),
        )


def predict_categories(model: CategorizerModel, features: np.ndarray):
    """Per-category probabilities and thresholded labels.

    Returns (binary n x 7, probabilities n x 7). The threshold is
    boundary-inclusive: probability exactly at the threshold assigns the
    label.
    """
    prob = model.probabilities(features)
    binary = (prob >= model.threshold).astype(np.float64)
    return binary, prob


def security_gate(binary: np.ndarray, labels: tuple[str, ...] = CATEGORY_LABELS) -> np.ndarray:
    """Boolean mask of rows holding at least one security-category label."""
    binary = np.asarray(binary)
    sec_cols = [i for i, name in enumerate(labels) if name in SECURITY_LABELS]
    return binary[:, sec_cols].sum(axis=1) > 0


@dataclass
class CategorizerConfig:
    learning_rate: float = 1e-5
    batch_size: int = 64
    patience: int = 5
    max_epochs: int = 200
    pos_weight: float = 0.8
    threshold: float = 0.5
    val_fraction: float = 0.2
    seed: int = 0


def train_categorizer(
    features: np.ndarray,
    gold: np.ndarray,
    cfg: CategorizerConfig = None,
    val_features: np.ndarray = None,
    val_gold: np.ndarray = None,
):
    """Train the linear heads with Adam on mini-batches.

    Shuffling and the internal validation split (used when no explicit
    validation set is given) are driven by ``cfg.seed``. Early stopping
    watches validation loss with the configured patience; the weights from
    the best validation epoch are returned together with a per-epoch log.

    Heads whose training data has only one class are skipped (left at
    zero) with a warning entry in the log.
    """
    cfg = cfg or CategorizerConfig()
    features = np.asarray(features, dtype=np.float64)
    gold = _check_binary(gold, "gold")
    if features.shape[0] != gold.shape[0]:
        raise DataValidationError("feature/label row count mismatch")
    n_labels = gold.shape[1]
    rng = np.random.default_rng(cfg.seed)

    if val_features is None:
        n = features.shape[0]
        order = rng.permutation(n)
        n_val = max(1, int(round(n * cfg.val_fraction)))
        val_idx, train_idx = order[:n_val], order[n_val:]
        val_features, val_gold = features[val_idx], gold[val_idx]
        features, gold = features[train_idx], gold[train_idx]
    else:
        val_features = np.asarray(val_features, dtype=np.float64)
        val_gold = _check_binary(val_gold, "val_gold")

    pos = gold.sum(axis=0)
    trained = (pos > 0) & (pos < gold.shape[0])
    log: list[dict] = []
    for j in np.flatnonzero(~trained):
        log.append({"warning": f"skipping single-class head {CATEGORY_LABELS[j] if j < len(CATEGORY_LABELS) else j}"})
    if not trained.any():
        raise DataValidationError("every category head is single-class; nothing to train")

    dim = features.shape[1]
    w = np.zeros((n_labels, dim))
    b = np.zeros(n_labels)
    m_w = np.zeros_like(w)
    v_w = np.zeros_like(w)
    m_b = np.zeros_like(b)
    v_b = np.zeros_like(b)
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0

    def val_loss() -> float:
        prob = clamp_probs(_sigmoid(val_features @ w.T + b))
        return category_loss(val_gold[:, trained], prob[:, trained], cfg.pos_weight)

    best = val_loss()
    best_w, best_b = w.copy(), b.copy()
    bad_epochs = 0
    n_train = features.shape[0]

    for epoch in range(cfg.max_epochs):
        order = rng.permutation(n_train)
        for start in range(0, n_train, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            x, y = features[idx], gold[idx]
            z = x @ w.T + b
            p = _sigmoid(z)
            # d(loss)/d(logit) for weighted BCE, mean over the batch
            dz = ((1.0 - y) * p - cfg.pos_weight * y * (1.0 - p)) / len(idx)
            dz[:, ~trained] = 0.0
            gw = dz.T @ x
            gb = dz.sum(axis=0)
            step += 1
            m_w = beta1 * m_w + (1 - beta1) * gw
            v_w = beta2 * v_w + (1 - beta2) * gw * gw
            m_b = beta1 * m_b + (1 - beta1) * gb
            v_b = beta2 * v_b + (1 - beta2) * gb * gb
            corr1 = 1 - beta1**step
            corr2 = 1 - beta2**step
            w -= cfg.learning_rate * (m_w / corr1) / (np.sqrt(v_w / corr2) + eps)
            b -= cfg.learning_rate * (m_b / corr1) / (np.sqrt(v_b / corr2) + eps)

        train_prob = clamp_probs(_sigmoid(features @ w.T + b))
        tl = category_loss(gold[:, trained], train_prob[:, trained], cfg.pos_weight)
        vl = val_loss()
        if not (np.isfinite(tl) and np.isfinite(vl)):
            raise NumericalError(f"non-finite categorizer loss at epoch {epoch}")
        log.append({"epoch": epoch, "train_loss": tl, "val_loss": vl})
        if vl < best:
            best = vl
            best_w, best_b = w.copy(), b.copy()
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs > cfg.patience:
                break

    model = CategorizerModel(
        weights=best_w,
        biases=best_b,
        labels=CATEGORY_LABELS if n_labels == N_CATEGORIES else tuple(str(i) for i in range(n_labels)),
        pos_weight=cfg.pos_weight,
        threshold=cfg.threshold,
        trained_mask=trained,
    )
    return model, log
