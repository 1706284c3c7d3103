"""Synthetic decision matrices with controlled rank correlation.

Columns are uniform on [0, 1] by construction (Gaussian copula): latent
standard normals receive the requested correlation structure and are
pushed through the exact normal CDF. Requested Spearman correlations are
calibrated to the latent Pearson scale via rho_latent = 2 sin(pi rho / 6),
so the uniform columns come out with the asked-for rank correlation.
"""

import json
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy.special import ndtr

from .aggregation import DecisionMatrix
from .errors import DimensionError, DomainError

# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GenSpec:
    """Recipe for one synthetic matrix.

    correlations maps criterion pairs to target Spearman correlations:
    ((j, k, rho), ...) with 1-based distinct j, k and |rho| < 1.
    """

    n: int
    m: int
    correlations: Tuple[Tuple[int, int, float], ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"need at least one row, got n={self.n}")
        if self.m < 2:
            raise DomainError(f"need at least two criteria, got m={self.m}")
        seen = set()
        normalized = []
        for item in self.correlations:
            j, k, rho = int(item[0]), int(item[1]), float(item[2])
            if not (1 <= j <= self.m and 1 <= k <= self.m) or j == k:
                raise DomainError(f"correlation pair ({j}, {k}) invalid for m={self.m}")
            if not abs(rho) < 1.0:
                raise DomainError(f"|rho| must be < 1, got {rho}")
            key = (min(j, k), max(j, k))
            if key in seen:
                raise DomainError(f"duplicate correlation target for pair {key}")
            seen.add(key)
            normalized.append((key[0], key[1], rho))
        object.__setattr__(self, "correlations", tuple(normalized))

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "correlations": [[j, k, rho] for j, k, rho in self.correlations],
            "seed": self.seed,
        }


def spec_from_json_dict(data: dict) -> GenSpec:
    try:
        return GenSpec(
            n=int(data["n"]),
            m=int(data["m"]),
            correlations=tuple(tuple(item) for item in data.get("correlations", [])),
            seed=int(data.get("seed", 0)),
        )
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed generation spec: {exc}") from exc


def save_spec_json(spec: GenSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(spec.to_json_dict(), handle, indent=2)
        handle.write("\n")


# ---------------------------------------------------------------------------


def latent_correlation(rho: float) -> float:
    """Latent normal Pearson correlation matching a uniform Spearman rho."""
    return 2.0 * np.sin(np.pi * rho / 6.0)


def generate(spec: GenSpec) -> DecisionMatrix:
    """Draw the matrix described by `spec`, deterministically in its seed."""
    corr = np.eye(spec.m)
    for j, k, rho in spec.correlations:
        corr[j - 1, k - 1] = corr[k - 1, j - 1] = latent_correlation(rho)
    try:
        factor = np.linalg.cholesky(corr)
    except np.linalg.LinAlgError as exc:
        raise DomainError(
            "correlation targets are not jointly feasible (latent matrix "
            "is not positive definite)"
        ) from exc
    rng = np.random.default_rng(spec.seed)
    latent = rng.standard_normal((spec.n, spec.m)) @ factor.T
    uniforms = ndtr(latent)
    names = tuple(f"c{j}" for j in range(1, spec.m + 1))
    return DecisionMatrix(uniforms, criteria=names)


def pearson(x, y) -> float:
    """Sample Pearson correlation of two equal-length vectors."""
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if xv.shape != yv.shape or xv.ndim != 1:
        raise DimensionError("pearson needs two 1-d vectors of equal length")
    if xv.shape[0] < 2:
        raise DomainError("pearson needs at least two observations")
    xc = xv - xv.mean()
    yc = yv - yv.mean()
    denom = np.sqrt((xc * xc).sum() * (yc * yc).sum())
    if denom == 0.0:
        raise DomainError("correlation undefined: a column has zero variance")
    return float((xc * yc).sum() / denom)


def spearman(x, y) -> float:
    """Sample Spearman correlation (Pearson on midranks)."""
    return pearson(_midranks(x), _midranks(y))


def _midranks(values) -> np.ndarray:
    vals = np.asarray(values, dtype=np.float64)
    order = np.argsort(vals, kind="stable")
    ranks = np.empty(vals.shape[0], dtype=np.float64)
    ranks[order] = np.arange(1, vals.shape[0] + 1)
    # average ranks inside tie groups
    sorted_vals = vals[order]
    i = 0
    while i < sorted_vals.shape[0]:
        j = i
        while j + 1 < sorted_vals.shape[0] and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        if j > i:
            ranks[order[i : j + 1]] = 0.5 * (i + 1 + j + 1)
        i = j + 1
    return ranks
