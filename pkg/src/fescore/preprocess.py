"""Dataset cleaning and fixed-point quantization.

Cleaning order is fixed: drop null-heavy columns, drop rows with remaining
nulls, drop outlier rows, convert timestamps to numeric epochs, min-max
scale numeric columns to [0, 1], one-hot encode categoricals and the label.
Quantization then maps floats to the signed integer message space of the
encryption layer: round(clamp(v, ±clip) * scale) with ties away from zero.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import BoundConfigError, DegenerateDatasetError, DimensionMismatch

# Largest dlog window the default profile is allowed to demand; the
# baby-step table for this ceiling is ~2^22.5 entries.
DEFAULT_DLOG_CEILING = 1 << 44

KIND_NUMERIC = "numeric"
KIND_CATEGORICAL = "categorical"
KIND_TIMESTAMP = "timestamp"


@dataclass
class RawDataset:
    """Column-oriented table with nullable cells and a label column."""

    frame: pd.DataFrame
    label_column: str
    kinds: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.label_column not in self.frame.columns:
            raise DimensionMismatch(f"label column {self.label_column!r} not in dataset")
        for col in self.frame.columns:
            if col == self.label_column:
                continue
            self.kinds.setdefault(col, _infer_kind(self.frame[col]))

    @classmethod
    def from_csv(cls, path, label_column: str, kinds: dict[str, str] | None = None) -> "RawDataset":
        frame = pd.read_csv(path, keep_default_na=False, na_values=[""])
        return cls(frame=frame, label_column=label_column, kinds=dict(kinds or {}))

    def to_csv(self, path) -> None:
        self.frame.to_csv(path, index=False, na_rep="")


def _infer_kind(col: pd.Series) -> str:
    if pd.api.types.is_datetime64_any_dtype(col):
        return KIND_TIMESTAMP
    if pd.api.types.is_numeric_dtype(col):
        return KIND_NUMERIC
    sample = col.dropna()
    if len(sample) and pd.to_datetime(sample, errors="coerce", format="ISO8601").notna().all():
        return KIND_TIMESTAMP
    return KIND_CATEGORICAL


@dataclass(frozen=True)
class CleaningPolicy:
    null_column_threshold: float = 0.5   # drop columns with a larger null fraction
    outlier_sigmas: float = 3.0          # drop rows beyond this many std devs
    scale_range: tuple[float, float] = (0.0, 1.0)


@dataclass
class CleanDataset:
    features: np.ndarray       # (rows, n) float64, no nulls
    labels: np.ndarray         # (rows, 2) one-hot float64
    feature_names: list[str]
    label_classes: list[str]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def __post_init__(self):
        if np.isnan(self.features).any():
            raise DegenerateDatasetError("clean dataset still contains nulls")


def preprocess(raw: RawDataset, policy: CleaningPolicy = CleaningPolicy()) -> CleanDataset:
    df = raw.frame.copy()
    label = raw.label_column

    # (a) null-heavy columns, then rows with any remaining null
    null_frac = df.isna().mean()
    drop_cols = [c for c in df.columns if c != label and null_frac[c] > policy.null_column_threshold]
    df = df.drop(columns=drop_cols)
    df = df.dropna(axis=0)
    if df.empty:
        raise DegenerateDatasetError("no rows survive null filtering")

    kinds = {c: raw.kinds[c] for c in df.columns if c != label}

    # (b) outlier rows, judged on numeric columns only
    numeric_cols = [c for c, k in kinds.items() if k == KIND_NUMERIC]
    if numeric_cols and len(df):
        block = df[numeric_cols].astype(float)
        mu = block.mean()
        sd = block.std(ddof=0).replace(0.0, np.inf)
        keep = ((block - mu).abs() / sd <= policy.outlier_sigmas).all(axis=1)
        df = df[keep]
    if df.empty:
        raise DegenerateDatasetError("no rows survive outlier filtering")

    # (c) timestamps -> numeric epoch seconds
    for c, k in kinds.items():
        if k == KIND_TIMESTAMP:
            ts = pd.to_datetime(df[c], errors="raise", format="ISO8601")
            df[c] = ts.astype("int64") / 1e9
            kinds[c] = KIND_NUMERIC

    # (d) min-max scale numeric columns
    lo, hi = policy.scale_range
    for c, k in kinds.items():
        if k == KIND_NUMERIC:
            col = df[c].astype(float)
            span = col.max() - col.min()
            df[c] = lo if span == 0 else (col - col.min()) / span * (hi - lo) + lo

    # (e) one-hot categoricals and the label
    cat_cols = [c for c, k in kinds.items() if k == KIND_CATEGORICAL]
    feature_df = df.drop(columns=[label])
    if cat_cols:
        feature_df = pd.get_dummies(feature_df, columns=cat_cols, dtype=float)
    if feature_df.shape[1] == 0:
        raise DegenerateDatasetError("no feature columns survive cleaning")

    classes = sorted(str(v) for v in df[label].unique())
    if len(classes) != 2:
        raise DegenerateDatasetError(f"expected a binary label, found classes {classes}")
    label_str = df[label].astype(str)
    labels = np.stack([(label_str == c).to_numpy(float) for c in classes], axis=1)

    return CleanDataset(
        features=feature_df.to_numpy(float),
        labels=labels,
        feature_names=[str(c) for c in feature_df.columns],
        label_classes=classes,
    )


# -- Quantization ------------------------------------------------------------

@dataclass(frozen=True)
class QuantConfig:
    """Fixed-point scales for records (x), first-layer (pr) and output (d)
    weights, plus the symmetric clip applied before scaling."""

    scale_x: int = 16
    scale_p: int = 16
    scale_d: int = 16
    clip: float = 1.0

    def __post_init__(self):
        if min(self.scale_x, self.scale_p, self.scale_d) < 1:
            raise BoundConfigError("quantization scales must be >= 1")
        if self.clip <= 0:
            raise BoundConfigError("clip must be positive")

    def to_json(self) -> str:
        return json.dumps(
            {"scale_x": self.scale_x, "scale_p": self.scale_p, "scale_d": self.scale_d,
             "clip": self.clip},
            sort_keys=True, separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, text: str) -> "QuantConfig":
        doc = json.loads(text)
        return cls(scale_x=int(doc["scale_x"]), scale_p=int(doc["scale_p"]),
                   scale_d=int(doc["scale_d"]), clip=float(doc["clip"]))

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    @property
    def score_divisor(self) -> int:
        # squaring doubles the x*pr scale; the output weights add one factor
        return (self.scale_x * self.scale_p) ** 2 * self.scale_d


DESK_PROFILE = QuantConfig()


@dataclass(frozen=True)
class QuantizedRecord:
    values: tuple[int, ...]
    config_id: str

    @property
    def dim(self) -> int:
        return len(self.values)


def quantize_vector(v, scale: int, clip: float) -> np.ndarray:
    """round(clamp(v, ±clip) * scale), rounding halves away from zero."""
    arr = np.clip(np.asarray(v, dtype=float), -clip, clip) * scale
    return np.copysign(np.floor(np.abs(arr) + 0.5), arr).astype(np.int64)


def quantize_matrix(m, scale: int, clip: float) -> np.ndarray:
    return quantize_vector(m, scale, clip)


def quantize_record(v, cfg: QuantConfig) -> QuantizedRecord:
    q = quantize_vector(v, cfg.scale_x, cfg.clip)
    return QuantizedRecord(values=tuple(int(x) for x in q), config_id=cfg.digest())


def _max_quantized(scale: int, clip: float) -> int:
    return int(np.floor(clip * scale + 0.5))


def score_bound(cfg: QuantConfig, n: int, d: int,
                dlog_ceiling: int = DEFAULT_DLOG_CEILING) -> int:
    """Certified upper bound on |integer score| for any in-range inputs.

    Every hidden coordinate is a sum of n products of quantized record and
    first-layer entries; the score squares it and weighs d of them.
    """
    if n < 1 or d < 1:
        raise DimensionMismatch("dimensions must be positive")
    k_max = n * _max_quantized(cfg.scale_x, cfg.clip) * _max_quantized(cfg.scale_p, cfg.clip)
    bound = d * k_max * k_max * _max_quantized(cfg.scale_d, cfg.clip)
    if bound > dlog_ceiling:
        raise BoundConfigError(
            f"score bound {bound} exceeds the dlog ceiling {dlog_ceiling}; use smaller scales")
    return bound


def dequantize_score(raw: int, cfg: QuantConfig) -> float:
    return raw / cfg.score_divisor


def quantization_error_bound(cfg: QuantConfig, n: int, d: int,
                             x_max: float | None = None,
                             p_max: float | None = None,
                             d_max: float | None = None) -> float:
    """Analytic worst-case |float score - dequantized integer score|.

    Per-entry rounding is at most half a step; the error propagates through
    the product sum, the squaring and the weighted output sum.  Magnitude
    caps default to the clip (their worst admissible value).
    """
    x_max = cfg.clip if x_max is None else min(x_max, cfg.clip)
    p_max = cfg.clip if p_max is None else min(p_max, cfg.clip)
    d_max = cfg.clip if d_max is None else min(d_max, cfg.clip)
    eps_x = 0.5 / cfg.scale_x
    eps_p = 0.5 / cfg.scale_p
    eps_d = 0.5 / cfg.scale_d
    k_max = n * x_max * p_max
    eps_k = n * (x_max * eps_p + p_max * eps_x + eps_x * eps_p)
    eps_k2 = eps_k * (2 * k_max + eps_k)
    k2_max = (k_max + eps_k) ** 2
    return d * (d_max * eps_k2 + k2_max * eps_d)


# -- Synthetic data -----------------------------------------------------------

def make_synthetic_raw(n_features: int = 130, rows: int = 400, seed: int = 0,
                       separation: float = 2.0, messy: bool = False) -> RawDataset:
    """Two Gaussian clusters per label over n_features numeric columns.

    With messy=True the table additionally carries a categorical column, a
    timestamp column, a null-riddled column and a few injected nulls and
    outliers, so the cleaning stages all have work to do.
    """
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=rows)
    centers = rng.normal(0.0, 1.0, size=(2, n_features))
    feats = centers[labels] * separation + rng.normal(0.0, 1.0, size=(rows, n_features))
    cols = {f"f{i:03d}": feats[:, i] for i in range(n_features)}
    frame = pd.DataFrame(cols)
    kinds = {c: KIND_NUMERIC for c in frame.columns}
    if messy:
        frame["segment"] = rng.choice(["retail", "sme", "corporate"], size=rows)
        kinds["segment"] = KIND_CATEGORICAL
        base = pd.Timestamp("2020-01-01")
        frame["opened"] = [str(base + pd.Timedelta(days=int(v))) for v in rng.integers(0, 3650, rows)]
        kinds["opened"] = KIND_TIMESTAMP
        mostly_null = np.full(rows, np.nan)
        mostly_null[: rows // 5] = rng.normal(size=rows // 5)
        frame["sparse"] = mostly_null
        kinds["sparse"] = KIND_NUMERIC
        null_rows = rng.choice(rows, size=max(1, rows // 20), replace=False)
        frame.loc[null_rows, "f000"] = np.nan
        outlier_rows = rng.choice(rows, size=max(1, rows // 30), replace=False)
        frame.loc[outlier_rows, "f001"] = 1e6
    frame["defaulted"] = np.where(labels == 1, "yes", "no")
    return RawDataset(frame=frame, label_column="defaulted", kinds=kinds)
