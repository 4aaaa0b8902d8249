from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Optional, List, Dict, Any, Literal, Tuple

import numpy as np

from config import SCHEMA_VERSION

# complex entry as [re, im]
Entry = Tuple[float, float]


class MatrixJSON(BaseModel):
	model_config = ConfigDict(extra="forbid")

	rows: int = Field(ge=0)
	cols: int = Field(ge=0)
	data: List[List[Entry]]

	@model_validator(mode="after")
	def _shape_matches(self):
		if len(self.data) != self.rows or any(len(row) != self.cols for row in self.data):
			raise ValueError(f"data does not have shape {self.rows}x{self.cols}")
		return self

	def to_array(self) -> np.ndarray:
		if self.rows == 0 or self.cols == 0:
			return np.zeros((self.rows, self.cols), dtype=complex)
		parts = np.array(self.data, dtype=float)
		return parts[..., 0] + 1j * parts[..., 1]

	@classmethod
	def from_array(cls, matrix: np.ndarray) -> "MatrixJSON":
		matrix = np.asarray(matrix, dtype=complex)
		rows, cols = matrix.shape
		data = [[(float(z.real), float(z.imag)) for z in row] for row in matrix]
		return cls(rows=rows, cols=cols, data=data)


class AlgebraJSON(BaseModel):
	model_config = ConfigDict(extra="forbid")

	label: str
	generators: List[MatrixJSON] = Field(min_length=1)
	adjoint_map: List[int]


class SlotJSON(BaseModel):
	model_config = ConfigDict(extra="forbid")

	algebra: str
	images: List[MatrixJSON]


class StinespringJSON(BaseModel):
	# explicit sizes keep zero-dimensional slots and spaces intact
	model_config = ConfigDict(extra="forbid")

	k: int = Field(ge=1)
	dim_h: int = Field(ge=0)
	dim_g: int = Field(ge=0)
	slot_dims: List[int]
	slots: List[SlotJSON]
	X: List[MatrixJSON]

	@model_validator(mode="after")
	def _counts_match(self):
		if len(self.slots) != self.k or len(self.slot_dims) != self.k:
			raise ValueError(f"expected {self.k} slots")
		if len(self.X) != self.k + 1:
			raise ValueError(f"expected {self.k + 1} connecting operators")
		return self


class ToleranceJSON(BaseModel):
	model_config = ConfigDict(extra="forbid")

	rank_rtol: Optional[float] = None
	eq_atol: Optional[float] = None


class GeneratorPayload(BaseModel):
	model_config = ConfigDict(extra="forbid")

	kraus: Optional[List[MatrixJSON]] = None
	D: Optional[MatrixJSON] = None
	xi: Optional[MatrixJSON] = None
	X: Optional[MatrixJSON] = None
	slot: int = Field(default=1, ge=1)


class GeneratorSpec(BaseModel):
	model_config = ConfigDict(extra="forbid")

	kind: Literal["cp_dilation", "commutant_perturbation", "spectral_triple", "similarity_homomorphism", "random_instance"]
	seed: int = 0
	k: int = Field(default=1, ge=0)
	slot_algebra_dims: List[int] = [2]
	multiplicities: List[int] = [1]
	pair_multiplicities: Optional[List[int]] = None
	algebra_kind: Literal["matrix", "diagonal"] = "matrix"
	dim_g: int = Field(default=1, ge=1)
	dim_h: int = Field(default=1, ge=1)
	reduce: bool = False
	pair: bool = False
	payload: Optional[GeneratorPayload] = None

	@field_validator("slot_algebra_dims", "multiplicities", "pair_multiplicities")
	@classmethod
	def _positive(cls, values):
		if values is not None and any(v < 1 for v in values):
			raise ValueError("dimensions and multiplicities must be positive")
		return values


class InstanceFile(BaseModel):
	model_config = ConfigDict(extra="forbid")

	version: str = SCHEMA_VERSION
	algebras: List[AlgebraJSON] = []
	representations: Optional[List[StinespringJSON]] = Field(default=None, min_length=1, max_length=2)
	tolerance: Optional[ToleranceJSON] = None
	generator: Optional[GeneratorSpec] = None

	@field_validator("version")
	@classmethod
	def _known_version(cls, value: str) -> str:
		if value != SCHEMA_VERSION:
			raise ValueError(f"unsupported schema version {value!r}, expected {SCHEMA_VERSION!r}")
		return value

	@model_validator(mode="after")
	def _one_source(self):
		if (self.representations is None) == (self.generator is None):
			raise ValueError("give exactly one of 'representations' and 'generator'")
		return self


class TermJSON(BaseModel):
	model_config = ConfigDict(extra="forbid")

	coeff: Entry = (1.0, 0.0)
	word: List[int] = []


class ArgumentJSON(BaseModel):
	model_config = ConfigDict(extra="forbid")

	matrix: Optional[MatrixJSON] = None
	terms: Optional[List[TermJSON]] = None

	@model_validator(mode="after")
	def _one_form(self):
		if (self.matrix is None) == (self.terms is None):
			raise ValueError("an argument is either a 'matrix' or a list of 'terms'")
		return self


class ArgumentFile(BaseModel):
	model_config = ConfigDict(extra="forbid")

	arguments: List[ArgumentJSON]


class CheckResult(BaseModel):
	name: str
	residual: float
	threshold: float
	passed: bool


class Report(BaseModel):
	command: str
	version: str = SCHEMA_VERSION
	instance_digest: str
	checks: List[CheckResult] = []
	passed: bool
	payload: Dict[str, Any] = {}
	wall_time_s: float = 0.0
