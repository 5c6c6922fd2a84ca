"""Random instance generation."""

from deleverage.generation.generator import (
    BIT_GENERATOR,
    MAX_ATTEMPTS,
    GenSpec,
    gap_shift,
    generate,
    generate_many,
)

__all__ = ["BIT_GENERATOR", "MAX_ATTEMPTS", "GenSpec", "gap_shift", "generate", "generate_many"]
