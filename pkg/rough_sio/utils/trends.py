"""
Trend statistics used to turn finite probe families into verdicts.
"""
import math
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np


def fitted_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of y against x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        return 0.0
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    if denom == 0:
        return 0.0
    return float(np.dot(xc, y - y.mean()) / denom)


def envelope_growth(log_scale: Sequence[float], values: Sequence[float], outer_fraction: float = 1.0 / 3.0) -> float:
    """Power-law growth exponent of ``values`` toward the end of ``log_scale``.

    ``log_scale`` runs from the interior outward. The exponent compares the
    maximum over the outer block with the maximum over the inner block,
    divided by the log-distance between their extreme probes. Bounded
    oscillation with period shorter than the inner block gives <= 0; a pure
    power law r^gamma gives exactly gamma.
    """
    s = np.asarray(log_scale, dtype=float)
    v = np.asarray(values, dtype=float)
    if s.size < 3:
        return 0.0
    if np.any(~np.isfinite(v)):
        return math.inf
    split = max(1, int(round(s.size * (1.0 - outer_fraction))))
    split = min(split, s.size - 1)
    inner, outer = v[:split], v[split:]
    positive = v[v > 0]
    floor = positive.min() * 1e-300 if positive.size else 1e-300
    top_inner = max(float(inner.max()), floor)
    top_outer = max(float(outer.max()), floor)
    distance = abs(s[-1] - s[split - 1])
    if distance == 0:
        return 0.0
    return (math.log(top_outer) - math.log(top_inner)) / distance


def two_sided_growth(log_scale: Sequence[float], values: Sequence[float]) -> Dict[str, float]:
    """Growth exponents toward both ends of a probe range ordered by scale."""
    s = np.asarray(log_scale, dtype=float)
    v = np.asarray(values, dtype=float)
    mid = s.size // 2
    low = envelope_growth(s[: mid + 1][::-1], v[: mid + 1][::-1])
    high = envelope_growth(s[mid:], v[mid:])
    return {"low": low, "high": high}


@dataclass(frozen=True)
class SummabilityReport:
    partial_sums: list
    last_block_share: float
    decay_rate: float
    cauchy: bool
    decaying: bool

    @property
    def certified(self) -> bool:
        return self.cauchy and self.decaying

    def to_dict(self) -> Dict:
        return {
            "partial_sums": [float(v) for v in self.partial_sums],
            "last_block_share": self.last_block_share,
            "decay_rate": self.decay_rate,
            "cauchy": self.cauchy,
            "decaying": self.decaying,
            "verdict": "certified-at-probe-scale" if self.certified else "not-certified",
        }


def summability(terms_by_index: Dict[int, float], block_ratio: float = 0.01, decay_fit: float = 0.05,
                exhaustive: bool = False) -> SummabilityReport:
    """Partial sums over index m, dyadic-block Cauchy test and log-decay fit.

    Blocks are {0}, [1, 2), [2, 4), [4, 8), ...; the last block is the one
    containing the largest probed index. An ``exhaustive`` family (every
    nonzero term enumerated) is a finite sum and passes both tests.
    """
    if not terms_by_index:
        return SummabilityReport([], 1.0, 0.0, False, False)
    indices = sorted(terms_by_index)
    terms = np.asarray([terms_by_index[m] for m in indices], dtype=float)
    partial = np.cumsum(terms)
    total = float(partial[-1])
    if not math.isfinite(total):
        return SummabilityReport(list(partial), 1.0, math.inf, False, False)
    top = indices[-1]
    block_start = 0 if top == 0 else 2 ** int(math.floor(math.log2(top)))
    last_block = float(sum(terms_by_index[m] for m in indices if m >= block_start))
    share = last_block / total if total > 0 else 0.0
    positive = terms > 0
    if positive.sum() >= 2:
        rate = fitted_slope(np.asarray(indices)[positive], np.log(terms[positive]))
    else:
        rate = -math.inf
    cauchy = exhaustive or share < block_ratio or total == 0
    decaying = exhaustive or rate < -decay_fit
    return SummabilityReport(list(partial), share, rate, bool(cauchy), bool(decaying))
