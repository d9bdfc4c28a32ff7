"""Flat key=value pipeline configuration with lossless round-tripping.

The file format is a TOML-compatible subset: one ``key = value`` per
line, ``#`` comments, booleans as true/false, strings quoted. Every
field defaults to the corresponding published hyperparameter where one
exists.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

from .errors import UsageError


@dataclass
class PipelineConfig:
    window_length: str = "6h"
    window_stride: str = "4h"
    blocks: str = "text,temporal"
    standardize_temporal: bool = True
    hash_dim: int = 768
    embed_dim: int = 256
    n_layers: int = 2
    heads: int = 1
    leaky_slope: float = 0.2
    learning_rate: float = 0.003
    margin: float = 100.0
    patience: int = 2
    max_epochs: int = 200
    triplet_weight: float = 1.0
    pairwise_weight: float = 1.0
    eps: str = "auto"
    min_pts: int = 3
    filter_threshold: float = 0.8
    noise_mode: str = "singleton"
    cat_learning_rate: float = 1e-5
    cat_batch_size: int = 64
    cat_patience: int = 5
    cat_max_epochs: int = 200
    pos_weight: float = 0.8
    cat_threshold: float = 0.5
    categorizer_model: str = ""
    checkpoint: str = ""
    self_loops: bool = True
    max_posting: int = 0  # 0 = unlimited
    merge: bool = False
    merge_jaccard: float = 0.5
    gate: bool = True
    seed: int = 0

    def eps_value(self) -> float | None:
        if self.eps == "auto":
            return None
        try:
            return float(self.eps)
        except ValueError:
            raise UsageError(f"eps must be a number or 'auto', got {self.eps!r}") from None

    def block_flags(self) -> tuple[bool, bool, bool]:
        names = [b.strip() for b in self.blocks.split(",") if b.strip()]
        for b in names:
            if b not in ("text", "temporal", "category"):
                raise UsageError(f"unknown feature block {b!r}")
        return ("text" in names, "temporal" in names, "category" in names)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                rendered = "true" if value else "false"
            elif isinstance(value, str):
                rendered = json.dumps(value)
            else:
                rendered = repr(value)
            lines.append(f"{f.name} = {rendered}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "PipelineConfig":
        fields = {f.name: f for f in dataclasses.fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"config line {lineno}: expected key = value")
            key, _, rendered = line.partition("=")
            key = key.strip()
            rendered = rendered.strip()
            if key not in fields:
                raise UsageError(f"config line {lineno}: unknown key {key!r}")
            ftype = fields[key].type
            try:
                if ftype == "bool":
                    if rendered not in ("true", "false"):
                        raise ValueError("expected true/false")
                    values[key] = rendered == "true"
                elif ftype == "int":
                    values[key] = int(rendered)
                elif ftype == "float":
                    values[key] = float(rendered)
                else:  # str
                    values[key] = json.loads(rendered) if rendered.startswith('"') else rendered
            except ValueError as exc:
                raise UsageError(f"config line {lineno}: {exc}") from exc
        return cls(**values)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())
