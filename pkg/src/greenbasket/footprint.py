"""Footprint measures and the combined star rating for food products.

Every product is scored on three impact dimensions (carbon, nitrogen,
water).  Three measures feed the rating:

* the weight-based footprint: product weight times a per-kg impact factor,
* the daily-value fraction: that footprint divided by a sustainable daily
  per-person allotment,
* optionally, the share of farm-level sustainability measures actually met.

The star rating compresses these into a single 0-3 score where 3 is the
most sustainable. All functions here are pure; callers may share inputs
across threads freely.
"""

from __future__ import annotations

import math
import re
from collections.abc import Mapping
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from greenbasket.errors import ConfigError, ValidationError

STAR_MAX = 3.0


class Dimension(str, Enum):
    """The three impact dimensions every product is scored on."""

    CARBON = "carbon"      # kg CO2-equivalent per kg of product
    NITROGEN = "nitrogen"  # kg reactive nitrogen per kg of product
    WATER = "water"        # litres per kg of product


#: Canonical dimension order used by reports and serializers.
DIMENSIONS: tuple[Dimension, ...] = (
    Dimension.CARBON,
    Dimension.NITROGEN,
    Dimension.WATER,
)


@dataclass(frozen=True)
class FootprintFactor:
    """Per-kilogram impact coefficient for one dimension."""

    dimension: Dimension
    value: float

    def __post_init__(self):
        if not isinstance(self.value, (int, float)) or isinstance(self.value, bool) \
                or not math.isfinite(self.value) or self.value < 0:
            raise ValidationError(
                f"footprint factor must be a finite number >= 0, got {self.value!r}",
                field="value",
            )


@dataclass(frozen=True)
class DailyReference:
    """Sustainable per-person daily impact allotment for one dimension."""

    dimension: Dimension
    daily_total: float

    def __post_init__(self):
        if not isinstance(self.daily_total, (int, float)) or isinstance(self.daily_total, bool) \
                or not math.isfinite(self.daily_total) or self.daily_total <= 0:
            raise ValidationError(
                f"daily reference total must be a finite number > 0, got {self.daily_total!r}",
                field="daily_total",
            )


@dataclass(frozen=True)
class SustainabilityChecklist:
    """Farm-level sustainability measures: which of the possible ones are met."""

    applied: frozenset[str]
    possible: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "applied", frozenset(self.applied))
        object.__setattr__(self, "possible", frozenset(self.possible))
        if not self.possible:
            raise ValidationError(
                "the set of possible sustainability measures must not be empty",
                field="possible",
            )
        if not self.applied <= self.possible:
            extra = ", ".join(sorted(self.applied - self.possible))
            raise ValidationError(
                f"applied measures not in the possible set: {extra}",
                field="applied",
            )


@dataclass(frozen=True)
class FootprintAssessment:
    """The three computed measures plus the combined star rating.

    ``sustainability_score`` is None when no farm checklist was available;
    the rating then averages the three dimension sub-scores only.
    """

    per_dimension_weight: Mapping[Dimension, float]
    per_dimension_dv: Mapping[Dimension, float]
    sustainability_score: float | None
    stars: float


def _require_finite_nonnegative(value: float, field: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool) \
            or not math.isfinite(value) or value < 0:
        raise ValidationError(
            f"{field} must be a finite number >= 0, got {value!r}", field=field
        )
    return float(value)


def footprint_weight(weight_kg: float, factor: FootprintFactor) -> float:
    """Impact of ``weight_kg`` of product: weight times the per-kg factor."""
    weight_kg = _require_finite_nonnegative(weight_kg, "weight_kg")
    return weight_kg * factor.value


def sustainability_score(checklist: SustainabilityChecklist) -> float:
    """Fraction of the possible farm sustainability measures actually met."""
    return len(checklist.applied) / len(checklist.possible)


def daily_value(
    fw: float,
    reference: DailyReference,
    dimension: Dimension | None = None,
) -> float:
    """Fraction of the daily allotment consumed by a footprint of ``fw``.

    May exceed 1.0: a single item can use more than one day's allotment.
    Passing ``dimension`` asserts that the reference belongs to it.
    """
    if dimension is not None and dimension != reference.dimension:
        raise ValidationError(
            f"daily reference is for {reference.dimension.value!r}, "
            f"expected {dimension.value!r}",
            field="dimension",
        )
    fw = _require_finite_nonnegative(fw, "fw")
    return fw / reference.daily_total


def star_rating(
    per_dimension_dv: Mapping[Dimension, float],
    sustainability: float | None = None,
) -> float:
    """Combine daily-value fractions into a single 0-3 star score.

    Each dimension contributes a sub-score clamp(1 - dv, 0, 1); the rating
    is the mean of the three sub-scores (plus the sustainability score as a
    fourth term when farm data exists), scaled to 3 stars.  The value is
    kept at full float precision; rounding to half stars is a display
    concern.
    """
    subscores = []
    for dim in DIMENSIONS:
        if dim not in per_dimension_dv:
            raise ValidationError(
                f"missing daily-value entry for dimension {dim.value!r}",
                field=dim.value,
            )
        dv = _require_finite_nonnegative(per_dimension_dv[dim], dim.value)
        subscores.append(min(max(1.0 - dv, 0.0), 1.0))
    if sustainability is not None:
        if not isinstance(sustainability, (int, float)) or isinstance(sustainability, bool) \
                or not math.isfinite(sustainability) or not 0.0 <= sustainability <= 1.0:
            raise ValidationError(
                f"sustainability score must be in [0, 1], got {sustainability!r}",
                field="sustainability",
            )
        subscores.append(float(sustainability))
    return STAR_MAX * (sum(subscores) / len(subscores))


def assess(
    product,
    weight_kg: float,
    references: Mapping[Dimension, DailyReference],
) -> FootprintAssessment:
    """Full assessment of one product instance at ``weight_kg``.

    ``product`` must expose per-dimension ``factors`` and an optional farm
    ``checklist`` (the catalog's Product does).  The result is exactly the
    composition of footprint_weight, daily_value and star_rating, so it is
    deterministic for identical inputs.
    """
    weights: dict[Dimension, float] = {}
    dvs: dict[Dimension, float] = {}
    for dim in DIMENSIONS:
        if dim not in product.factors:
            raise ValidationError(
                f"product has no footprint factor for {dim.value!r}",
                field=f"factors[{dim.value}]",
            )
        if dim not in references:
            raise ValidationError(
                f"no daily reference for {dim.value!r}",
                field=f"references[{dim.value}]",
            )
        fw = footprint_weight(weight_kg, product.factors[dim])
        weights[dim] = fw
        dvs[dim] = daily_value(fw, references[dim], dimension=dim)
    checklist = getattr(product, "checklist", None)
    score = sustainability_score(checklist) if checklist is not None else None
    return FootprintAssessment(
        per_dimension_weight=weights,
        per_dimension_dv=dvs,
        sustainability_score=score,
        stars=star_rating(dvs, score),
    )


def assessment_to_dict(assessment: FootprintAssessment) -> dict:
    """JSON-friendly form; exact float round trip via repr-preserving json."""
    return {
        "weights": {d.value: assessment.per_dimension_weight[d] for d in DIMENSIONS},
        "daily_value": {d.value: assessment.per_dimension_dv[d] for d in DIMENSIONS},
        "sustainability_score": assessment.sustainability_score,
        "stars": assessment.stars,
    }


def assessment_from_dict(payload: Mapping) -> FootprintAssessment:
    return FootprintAssessment(
        per_dimension_weight={d: payload["weights"][d.value] for d in DIMENSIONS},
        per_dimension_dv={d: payload["daily_value"][d.value] for d in DIMENSIONS},
        sustainability_score=payload["sustainability_score"],
        stars=payload["stars"],
    )


# --- daily-reference configuration -----------------------------------------
#
# One line per dimension:  <dimension> = <positive number> <units>
# '#' starts a comment; blank lines are ignored.  All three dimensions are
# required. Parse errors name the line and the offending field.

_REFERENCE_LINE = re.compile(r"^(?P<name>\S+)\s*=\s*(?P<value>\S+)\s+(?P<units>\S.*)$")


def parse_daily_references(text: str, source: str = "<string>") -> dict[Dimension, DailyReference]:
    """Parse a daily-reference document into a total per-dimension map."""
    references: dict[Dimension, DailyReference] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _REFERENCE_LINE.match(line)
        if match is None:
            raise ConfigError(
                f"{source}:{lineno}: expected '<dimension> = <number> <units>', "
                f"got {line!r} (field 'line')",
                source=source,
            )
        name = match.group("name")
        try:
            dimension = Dimension(name)
        except ValueError:
            raise ConfigError(
                f"{source}:{lineno}: unknown dimension {name!r} (field 'dimension')",
                source=source,
            ) from None
        if dimension in references:
            raise ConfigError(
                f"{source}:{lineno}: duplicate entry for {name!r} (field 'dimension')",
                source=source,
            )
        try:
            value = float(match.group("value"))
        except ValueError:
            raise ConfigError(
                f"{source}:{lineno}: not a number: {match.group('value')!r} (field 'value')",
                source=source,
            ) from None
        if not math.isfinite(value) or value <= 0:
            raise ConfigError(
                f"{source}:{lineno}: daily total must be > 0, got {value} (field 'value')",
                source=source,
            )
        if not match.group("units").strip():
            raise ConfigError(
                f"{source}:{lineno}: missing units annotation (field 'units')",
                source=source,
            )
        references[dimension] = DailyReference(dimension=dimension, daily_total=value)
    missing = [d.value for d in DIMENSIONS if d not in references]
    if missing:
        raise ConfigError(
            f"{source}: missing entries for: {', '.join(missing)} (field 'dimension')",
            source=source,
        )
    return references


def load_daily_references(path: str | Path) -> dict[Dimension, DailyReference]:
    """Read and parse the daily-reference configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read daily references: {exc}", source=str(path)) from exc
    return parse_daily_references(text, source=str(path))
