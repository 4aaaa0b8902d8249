from typing import Optional
from pydantic import BaseModel, ConfigDict, field_validator

# Version tag written into every instance file; readers reject other versions.
SCHEMA_VERSION = "1.0"

DEFAULT_RANK_RTOL = 1e-10
DEFAULT_EQ_ATOL = 1e-8

# Caps for generated instances (per-slot dilation dimension, number of slots)
MAX_SLOT_DIM = 16
MAX_SLOTS = 4

LOG_FORMAT = "%(levelname)s - %(name)s - %(message)s"


class TolerancePolicy(BaseModel):
    model_config = ConfigDict(frozen=True)

    rank_rtol: float = DEFAULT_RANK_RTOL
    eq_atol: float = DEFAULT_EQ_ATOL

    @field_validator("rank_rtol", "eq_atol")
    @classmethod
    def _open_unit_interval(cls, value: float) -> float:
        if not 0.0 < value < 1.0:
            raise ValueError("tolerances must lie strictly between 0 and 1")
        return value

    def override(self, rank_rtol: Optional[float] = None, eq_atol: Optional[float] = None) -> "TolerancePolicy":
        return TolerancePolicy(
            rank_rtol=self.rank_rtol if rank_rtol is None else rank_rtol,
            eq_atol=self.eq_atol if eq_atol is None else eq_atol,
        )


DEFAULT_POLICY = TolerancePolicy()
