from fractions import Fraction
from typing import Annotated, Any

from pydantic import BaseModel, BeforeValidator, ConfigDict, PlainSerializer


class BaseSchema(BaseModel):
    """Base schema with common configuration."""

    model_config = ConfigDict(from_attributes=True, arbitrary_types_allowed=True)


class StrictSchema(BaseSchema):
    """Config sections: unknown keys are errors."""

    model_config = ConfigDict(from_attributes=True, arbitrary_types_allowed=True, extra="forbid")


def parse_rational(value: Any) -> Fraction:
    """Accept an integer, a "p/q" string or a [p, q] pair; floats are refused."""
    if isinstance(value, bool) or isinstance(value, float):
        raise ValueError("rationals must be written as integers, 'p/q' strings or [p, q] pairs")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError:
            raise ValueError(f"'{value}' is not a rational")
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(v, int) and not isinstance(v, bool) for v in value
    ):
        if value[1] == 0:
            raise ValueError("zero denominator")
        return Fraction(value[0], value[1])
    raise ValueError(f"{value!r} is not a rational")


Rational = Annotated[
    Fraction,
    BeforeValidator(parse_rational),
    PlainSerializer(lambda q: str(q), return_type=str),
]
