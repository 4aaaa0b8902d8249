import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from pydantic import BaseModel, ValidationError

from config import DEFAULT_POLICY, TolerancePolicy
from errors import SchemaError, ShapeError
from models import AlgebraElement, AlgebraPresentation, MapInstance, Representation, StinespringData
from schemas import (
    AlgebraJSON,
    ArgumentFile,
    InstanceFile,
    MatrixJSON,
    SlotJSON,
    StinespringJSON,
    ToleranceJSON,
)
from services.algebra import element_from_matrix, verify_representation, word_basis

logger = logging.getLogger(__name__)


def canonical_json(document: Union[BaseModel, dict]) -> str:
    """Sorted keys, two-space indent, shortest round-trip floats."""
    if isinstance(document, BaseModel):
        document = document.model_dump(mode="json", exclude_none=True)
    return json.dumps(document, sort_keys=True, indent=2, allow_nan=False) + "\n"


def digest(document: Union[BaseModel, dict]) -> str:
    return hashlib.sha256(canonical_json(document).encode("utf-8")).hexdigest()


class InstanceCodec:
    """Moves instances between the JSON wire format and the domain records."""

    def __init__(self, policy: TolerancePolicy = DEFAULT_POLICY):
        self.policy = policy

    def _validate(self, model, text: str):
        try:
            return model.model_validate_json(text)
        except (ValidationError, json.JSONDecodeError) as exc:
            raise SchemaError(f"invalid {model.__name__}: {exc}") from exc

    def parse_instance(self, text: str) -> InstanceFile:
        return self._validate(InstanceFile, text)

    def load_instance(self, path: Union[str, Path]) -> InstanceFile:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise SchemaError(f"cannot read instance file {path}: {exc}") from exc
        return self.parse_instance(text)

    def policy_for(self, instance: InstanceFile) -> TolerancePolicy:
        if instance.tolerance is None:
            return self.policy
        try:
            return self.policy.override(instance.tolerance.rank_rtol, instance.tolerance.eq_atol)
        except ValidationError as exc:
            raise SchemaError(f"invalid tolerance block: {exc}") from exc

    def decode_algebras(self, instance: InstanceFile) -> Dict[str, AlgebraPresentation]:
        algebras: Dict[str, AlgebraPresentation] = {}
        for entry in instance.algebras:
            if entry.label in algebras:
                raise SchemaError(f"algebra '{entry.label}' declared twice")
            algebras[entry.label] = AlgebraPresentation(
                entry.label, tuple(m.to_array() for m in entry.generators), tuple(entry.adjoint_map)
            )
            # adjoint closure and unitality of the presentation
            word_basis(algebras[entry.label], self.policy)
        return algebras

    def decode_data(self, wire: StinespringJSON, algebras: Dict[str, AlgebraPresentation]) -> StinespringData:
        reps = []
        for i, (slot, dim) in enumerate(zip(wire.slots, wire.slot_dims)):
            if slot.algebra not in algebras:
                raise SchemaError(f"slot {i + 1} references undeclared algebra '{slot.algebra}'")
            images = tuple(m.to_array() for m in slot.images)
            if any(image.shape != (dim, dim) for image in images):
                raise ShapeError(f"slot {i + 1}: images must be {dim}x{dim}")
            rep = Representation(algebras[slot.algebra], images)
            verify_representation(rep, self.policy)
            reps.append(rep)
        sizes = [wire.dim_h] + list(wire.slot_dims) + [wire.dim_g]
        X = []
        for j, (m, rows, cols) in enumerate(zip(wire.X, sizes[:-1], sizes[1:])):
            matrix = m.to_array()
            if matrix.shape != (rows, cols):
                raise ShapeError(f"X_{j} is {matrix.shape}, expected {(rows, cols)}")
            X.append(matrix)
        return StinespringData(tuple(reps), tuple(X))

    def decode_instance(self, instance: InstanceFile) -> MapInstance:
        if instance.representations is None:
            raise SchemaError("instance carries a generator spec, not explicit representations")
        algebras = self.decode_algebras(instance)
        data = [self.decode_data(wire, algebras) for wire in instance.representations]
        return MapInstance(tuple(data[0].algebras), *data)

    def encode_algebra(self, algebra: AlgebraPresentation) -> AlgebraJSON:
        return AlgebraJSON(
            label=algebra.label,
            generators=[MatrixJSON.from_array(g) for g in algebra.gen_matrices],
            adjoint_map=list(algebra.adjoint_map),
        )

    def encode_data(self, S: StinespringData) -> StinespringJSON:
        return StinespringJSON(
            k=S.k,
            dim_h=S.dim_h,
            dim_g=S.dim_g,
            slot_dims=S.dims,
            slots=[
                SlotJSON(algebra=rep.algebra.label, images=[MatrixJSON.from_array(g) for g in rep.images])
                for rep in S.reps
            ],
            X=[MatrixJSON.from_array(X) for X in S.X],
        )

    def encode_instance(self, instance: MapInstance, tolerance: Optional[TolerancePolicy] = None) -> InstanceFile:
        seen: Dict[str, AlgebraPresentation] = {}
        for algebra in instance.algebras:
            seen.setdefault(algebra.label, algebra)
        data = [instance.representation_a]
        if instance.representation_b is not None:
            data.append(instance.representation_b)
        return InstanceFile(
            algebras=[self.encode_algebra(a) for a in seen.values()],
            representations=[self.encode_data(S) for S in data],
            tolerance=None if tolerance is None else ToleranceJSON(rank_rtol=tolerance.rank_rtol, eq_atol=tolerance.eq_atol),
        )

    def parse_arguments(
        self, text: str, algebras: Sequence[AlgebraPresentation], pol: Optional[TolerancePolicy] = None
    ) -> List[AlgebraElement]:
        pol = pol or self.policy
        wire = self._validate(ArgumentFile, text)
        if len(wire.arguments) != len(algebras):
            raise ShapeError(f"map has {len(algebras)} slots, argument file has {len(wire.arguments)} entries")
        elements = []
        for alg, arg in zip(algebras, wire.arguments):
            if arg.matrix is not None:
                elements.append(element_from_matrix(alg, arg.matrix.to_array(), pol))
            else:
                elements.append(AlgebraElement(tuple(
                    (complex(t.coeff[0], t.coeff[1]), tuple(t.word)) for t in arg.terms
                )))
        return elements
