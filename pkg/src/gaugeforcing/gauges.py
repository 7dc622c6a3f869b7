"""Gauge functions at dyadic scales, exact and finite-horizon.

A gauge assigns to each depth ``n`` a positive rational ``g(2^-n)``, read as
the cost of covering with a cylinder of diameter ``2^-n``.  Values are
non-increasing in ``n`` and stored exactly as rationals.  The depth index
runs from 0 to a finite horizon; operations state explicitly how they behave
at that boundary instead of pretending the tail is known.

Two constructions matter throughout the package:

* the ratio trace ``g(2^-n) * 2^n``, whose running minimum is the finite
  stand-in for the measure of the whole space under ``g``;
* the hat transform, the largest gauge below ``g`` whose ratio trace is
  non-decreasing, which is what cover refinement can actually realize.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (
    HorizonExhaustedError,
    ParseError,
    PreconditionError,
    RangeError,
    ValidationError,
)

# Hard cap on representable depth; keeps runaway configs from allocating    \
# unboundedly.  Everything in the package works at depths far below this.
HORIZON_CAP = 4096


@dataclass(frozen=True)
class GaugeFunction:
    """Finite table of gauge values, ``values[n] = g(2^-n)``.

    Invariants: at least one value, every value a positive rational, and the
    sequence is non-increasing.  The horizon is the largest valid depth.
    """

    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.values, tuple):
            object.__setattr__(self, "values", tuple(self.values))
        coerced = []
        for n, v in enumerate(self.values):
            if isinstance(v, Fraction):
                coerced.append(v)
            elif isinstance(v, int):
                coerced.append(Fraction(v))
            else:
                raise ValidationError(f"gauge value at depth {n} is not rational: {v!r}")
        object.__setattr__(self, "values", tuple(coerced))
        if not self.values:
            raise ValidationError("gauge must have at least one value")
        if len(self.values) > HORIZON_CAP + 1:
            raise ValidationError(f"gauge horizon exceeds cap {HORIZON_CAP}")
        for n, v in enumerate(self.values):
            if v <= 0:
                raise ValidationError(f"gauge value at depth {n} is not positive: {v}")
            if n > 0 and v > self.values[n - 1]:
                raise ValidationError(
                    f"gauge values increase at depth {n}: {self.values[n-1]} -> {v}"
                )

    @property
    def horizon(self) -> int:
        return len(self.values) - 1

    def value(self, n: int) -> Fraction:
        if not 0 <= n <= self.horizon:
            raise RangeError(f"depth {n} outside gauge horizon {self.horizon}")
        return self.values[n]

    def ratio(self, n: int) -> Fraction:
        """Ratio trace entry ``g(2^-n) * 2^n``."""
        return self.value(n) * (1 << n)

    def truncate(self, horizon: int) -> "GaugeFunction":
        if not 0 <= horizon <= self.horizon:
            raise RangeError(f"cannot truncate to horizon {horizon} from {self.horizon}")
        return GaugeFunction(self.values[: horizon + 1])


def gauge_from_exponents(exponents: Sequence[int]) -> GaugeFunction:
    """Build the gauge ``g(2^-n) = 2^-x(n)`` from a non-decreasing exponent table.

    Raises a validation error naming the first offending index when the table
    is not a non-decreasing sequence of naturals.
    """
    exps = list(exponents)
    if not exps:
        raise ValidationError("exponent table must be non-empty")
    for n, x in enumerate(exps):
        if not isinstance(x, int) or x < 0:
            raise ValidationError(f"exponent at index {n} is not a natural: {x!r}")
        if n > 0 and x < exps[n - 1]:
            raise ValidationError(f"exponents decrease at index {n}: {exps[n-1]} -> {x}")
    return GaugeFunction(tuple(Fraction(1, 1 << x) for x in exps))


def identity_gauge(horizon: int) -> GaugeFunction:
    """The gauge ``g(2^-n) = 2^-n``; its ratio trace is constantly 1."""
    return gauge_from_exponents(list(range(horizon + 1)))


def constant_gauge(value: Fraction, horizon: int) -> GaugeFunction:
    return GaugeFunction(tuple(Fraction(value) for _ in range(horizon + 1)))


# ---------------------------------------------------------------------------
# serialization


def gauge_to_json(g: GaugeFunction) -> dict:
    return {
        "horizon": g.horizon,
        "values": [[str(v.numerator), str(v.denominator)] for v in g.values],
    }


def gauge_from_json(obj: object) -> GaugeFunction:
    if not isinstance(obj, dict):
        raise ParseError(f"gauge object must be a JSON object, got {type(obj).__name__}")
    if "exponents" in obj:
        exps = obj["exponents"]
        if not isinstance(exps, list) or not all(isinstance(x, int) for x in exps):
            raise ParseError("gauge exponents must be a list of integers")
        try:
            return gauge_from_exponents(exps)
        except ValidationError:
            raise
    if "values" not in obj:
        raise ParseError("gauge object needs a 'values' or 'exponents' field")
    raw = obj["values"]
    if not isinstance(raw, list):
        raise ParseError("gauge 'values' must be a list")
    vals = []
    for n, pair in enumerate(raw):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ParseError(f"gauge value {n} must be a [num, den] pair")
        try:
            num, den = int(pair[0]), int(pair[1])
        except (TypeError, ValueError) as exc:
            raise ParseError(f"gauge value {n} has non-integer parts: {pair!r}") from exc
        if den == 0:
            raise ParseError(f"gauge value {n} has zero denominator")
        vals.append(Fraction(num, den))
    g = GaugeFunction(tuple(vals))
    declared = obj.get("horizon")
    if declared is not None and declared != g.horizon:
        raise ParseError(f"declared horizon {declared} does not match {g.horizon} values")
    return g


def gauge_loads(text: str) -> GaugeFunction:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid gauge JSON: {exc}") from exc
    return gauge_from_json(obj)


def gauge_dumps(g: GaugeFunction) -> str:
    return json.dumps(gauge_to_json(g), sort_keys=True, separators=(",", ":")) + "\n"


# ---------------------------------------------------------------------------
# comparison


def dominates_on_window(g0: GaugeFunction, g1: GaugeFunction, lo: int = 0,
                        hi: int | None = None) -> bool:
    """Pointwise ``g0 >= g1`` on the inclusive depth window ``[lo, hi]``."""
    shared = min(g0.horizon, g1.horizon)
    if hi is None:
        hi = shared
    if lo < 0 or lo > hi or hi > shared:
        raise RangeError(f"window [{lo}, {hi}] outside shared horizon {shared}")
    return all(g0.values[n] >= g1.values[n] for n in range(lo, hi + 1))


def eventually_dominates(g0: GaugeFunction, g1: GaugeFunction) -> int | None:
    """Least depth N with ``g0 >= g1`` from N through the shared horizon.

    Returns None when no such threshold exists, i.e. when g0 is still below
    g1 at the horizon itself.
    """
    shared = min(g0.horizon, g1.horizon)
    last_fail = -1
    for n in range(shared + 1):
        if g0.values[n] < g1.values[n]:
            last_fail = n
    if last_fail == shared:
        return None
    return last_fail + 1


def is_ratio_monotone(g: GaugeFunction) -> bool:
    """True when the ratio trace ``g(2^-n) * 2^n`` is non-decreasing."""
    return all(g.ratio(n + 1) >= g.ratio(n) for n in range(g.horizon))


# ---------------------------------------------------------------------------
# transforms


def scale(g: GaugeFunction, c: Fraction) -> GaugeFunction:
    c = Fraction(c)
    if c <= 0:
        raise ValidationError(f"scale factor must be positive, got {c}")
    return GaugeFunction(tuple(c * v for v in g.values))


def hat_transform(g: GaugeFunction) -> GaugeFunction:
    """Largest gauge below ``g`` with a non-decreasing ratio trace.

    At each depth the transform takes the best cylinder-splitting rate the
    tail of ``g`` still offers:

        hat(n) = 2^-n * min{ g(2^-m) * 2^m : n <= m <= horizon }.

    The transform is idempotent, commutes with scaling, and fixes exactly the
    gauges whose ratio trace was already non-decreasing.
    """
    h = g.horizon
    out = [Fraction(0)] * (h + 1)
    tail = g.ratio(h)
    out[h] = g.values[h]
    for n in range(h - 1, -1, -1):
        tail = min(tail, g.ratio(n))
        out[n] = tail / (1 << n)
    return GaugeFunction(tuple(out))


def finer_gauge(g: GaugeFunction, catalog: Sequence[GaugeFunction]) -> GaugeFunction:
    """Build a gauge below ``g`` that escapes every catalog member.

    The construction alternates two segment kinds, one pair per catalog
    member: a copy segment ``c * g`` extended until it strictly exceeds the
    member at some depth, then a linear-decay segment (halving per depth)
    until the ratio to ``g`` has halved.  Each boundary takes the least depth
    that satisfies its goal, so the output is deterministic.

    Requires ``g`` ratio-monotone, and no catalog member may already dominate
    ``g`` at the shared horizon.  After the k-th stage the ratio to ``g`` is
    at most ``2^-k``; per-step decay never exceeds halving, so the output is
    itself a valid gauge with a non-decreasing ratio trace.
    """
    if not is_ratio_monotone(g):
        raise PreconditionError("base gauge must have a non-decreasing ratio trace")
    horizon = g.horizon
    for i, h in enumerate(catalog):
        if h.horizon < horizon:
            raise RangeError(f"catalog member {i} has horizon {h.horizon} < {horizon}")
        if eventually_dominates(h, g) is not None:
            raise PreconditionError(f"catalog member {i} eventually dominates the base gauge")

    out: list[Fraction | None] = [None] * (horizon + 1)
    out[0] = g.values[0]
    ratio = Fraction(1)
    pos = 0
    for stage, h in enumerate(catalog, start=1):
        # copy segment: out = ratio * g, advanced to the least strict escape
        while True:
            if out[pos] is None:
                out[pos] = ratio * g.values[pos]
            if out[pos] > h.values[pos]:
                break
            if pos == horizon:
                raise HorizonExhaustedError(
                    f"stage {stage}: no escape depth over catalog member within horizon {horizon}"
                )
            pos += 1
        # decay segment: halve per depth until the ratio to g has halved
        target = ratio / 2
        while out[pos] / g.values[pos] > target:
            if pos == horizon:
                raise HorizonExhaustedError(
                    f"stage {stage}: ratio target {target} not reached within horizon {horizon}"
                )
            pos += 1
            out[pos] = out[pos - 1] / 2
        ratio = out[pos] / g.values[pos]
    for n in range(pos + 1, horizon + 1):
        out[n] = ratio * g.values[n]
    return GaugeFunction(tuple(v for v in out if v is not None))
