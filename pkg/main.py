import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from config import DEFAULT_POLICY, LOG_FORMAT, TolerancePolicy
from errors import GenericPositionViolated, HalmosIdentityViolated, NotInvertible, SchemaError, ToolkitError, VerificationError
from models import MapInstance
from schemas import GeneratorSpec, InstanceFile, MatrixJSON, Report
from services.genlab import InstanceGenerator
from services.instance_codec import InstanceCodec, canonical_json, digest
from services.intertwiner import IntertwinerBuilder, exchange_residual, swap
from services.minimality import MinimalityAnalyzer
from services.reporter import ReportBuilder, render_pretty
from services.stinespring import evaluate_phi, phi_equal

logger = logging.getLogger("stinespring_toolkit")


def build_parser() -> argparse.ArgumentParser:
	common = argparse.ArgumentParser(add_help=False)
	common.add_argument("--tolerance-rank", type=float, default=None, help="relative SVD cutoff for ranks")
	common.add_argument("--tolerance-eq", type=float, default=None, help="absolute tolerance for identities")
	common.add_argument("--seed", type=int, default=None, help="overrides the seed of a generator spec")
	common.add_argument("--out", type=Path, default=None, help="write the output document to this file")
	common.add_argument("--format", choices=["json", "pretty"], default="json")
	common.add_argument("--verbose", action="store_true", help="debug diagnostics on stderr")
	common.add_argument("--workers", type=int, default=None, help="thread pool size for per-slot intertwiner work")

	parser = argparse.ArgumentParser(
		prog="stinespring-toolkit",
		description="Minimal Stinespring representations of multilinear maps and their intertwiners",
	)
	commands = parser.add_subparsers(dest="command", required=True)

	evaluate = commands.add_parser("evaluate", parents=[common], help="evaluate the map on one argument tuple")
	evaluate.add_argument("instance", type=Path)
	evaluate.add_argument("arguments", type=Path)

	reduce = commands.add_parser("reduce", parents=[common], help="compress to a minimal representation")
	reduce.add_argument("instance", type=Path)
	reduce.add_argument("--allow-degenerate", action="store_true", help="accept zero-dimensional slots")

	check = commands.add_parser("check-minimal", parents=[common], help="report span dimensions per slot")
	check.add_argument("instance", type=Path)

	intertwine = commands.add_parser("intertwine", parents=[common], help="build T_i, W_i and |T_i| for a pair")
	intertwine.add_argument("instance", type=Path)
	intertwine.add_argument("--exchange", action="store_true", help="also check T_i' T_i = I against the swapped pair")

	generate = commands.add_parser("generate", parents=[common], help="write an instance from a generator spec")
	generate.add_argument("spec", type=Path)
	return parser


def _policy(args: argparse.Namespace, base: TolerancePolicy) -> TolerancePolicy:
	try:
		return base.override(args.tolerance_rank, args.tolerance_eq)
	except ValidationError as exc:
		raise SchemaError(f"invalid tolerance flags: {exc}") from exc


def _emit(text: str, out: Optional[Path]) -> None:
	if out is None:
		sys.stdout.write(text)
	else:
		out.write_text(text, encoding="utf-8")


def _emit_report(report: Report, args: argparse.Namespace, out: Optional[Path]) -> int:
	_emit(render_pretty(report) if args.format == "pretty" else canonical_json(report), out)
	return 0 if report.passed else 1


def _with_seed(spec: GeneratorSpec, seed: Optional[int]) -> GeneratorSpec:
	return spec if seed is None else spec.model_copy(update={"seed": seed})


def _load(args: argparse.Namespace, codec: InstanceCodec):
	"""Reads the instance file and returns (wire document, domain instance, policy)."""
	wire = codec.load_instance(args.instance)
	policy = _policy(args, codec.policy_for(wire))
	codec.policy = policy
	if wire.generator is not None:
		instance = InstanceGenerator(policy).generate(_with_seed(wire.generator, args.seed))
		wire = codec.encode_instance(instance)
	else:
		instance = codec.decode_instance(wire)
	return wire, instance, policy


def cmd_evaluate(args: argparse.Namespace, codec: InstanceCodec) -> int:
	wire, instance, policy = _load(args, codec)
	try:
		text = args.arguments.read_text(encoding="utf-8")
	except OSError as exc:
		raise SchemaError(f"cannot read argument file {args.arguments}: {exc}") from exc
	elements = codec.parse_arguments(text, instance.algebras, policy)
	value = evaluate_phi(instance.representation_a, elements)

	report = ReportBuilder("evaluate", digest(wire))
	report.add_payload(value=MatrixJSON.from_array(value).model_dump(mode="json"))
	return _emit_report(report.build(), args, args.out)


def _reduction_checks(report: ReportBuilder, name: str, original, reduced, projections, analyzer, policy) -> None:
	_, residual = phi_equal(original, reduced, policy)
	report.check(f"{name}.phi_equal", residual, policy.eq_atol)
	report.check(f"{name}.projection_commutation", analyzer.projection_commutation_residual(original, projections), policy.eq_atol)
	minimality = analyzer.is_minimal(reduced)
	report.flag(f"{name}.minimal", minimality.minimal)
	report.add_payload(**{f"{name}_slot_dims": {"before": original.dims, "after": reduced.dims}})


def cmd_reduce(args: argparse.Namespace, codec: InstanceCodec) -> int:
	wire, instance, policy = _load(args, codec)
	analyzer = MinimalityAnalyzer(policy)
	report = ReportBuilder("reduce", digest(wire))

	reduced = []
	for name, data in (("A", instance.representation_a), ("B", instance.representation_b)):
		if data is None:
			continue
		compressed, projections = analyzer.reduce_to_minimal(data, allow_degenerate=args.allow_degenerate)
		_reduction_checks(report, name, data, compressed, projections, analyzer, policy)
		reduced.append(compressed)

	output = codec.encode_instance(MapInstance(instance.algebras, *reduced), policy)
	if args.out is not None:
		_emit(canonical_json(output), args.out)
		report.add_payload(reduced_digest=digest(output))
	else:
		report.add_payload(reduced=output.model_dump(mode="json", exclude_none=True))
	return _emit_report(report.build(), args, None)


def cmd_check_minimal(args: argparse.Namespace, codec: InstanceCodec) -> int:
	wire, instance, policy = _load(args, codec)
	analyzer = MinimalityAnalyzer(policy)
	report = ReportBuilder("check-minimal", digest(wire))
	for name, data in (("A", instance.representation_a), ("B", instance.representation_b)):
		if data is None:
			continue
		result = analyzer.is_minimal(data)
		for i, (right, left) in enumerate(zip(result.minimal_right, result.minimal_left), start=1):
			report.flag(f"{name}.right_span[{i}]", right)
			report.flag(f"{name}.left_span[{i}]", left)
		report.add_payload(**{name: {
			"slot_dims": result.slot_dims,
			"right_dims": result.right_dims,
			"left_dims": result.left_dims,
		}})
	return _emit_report(report.build(), args, args.out)


def _matrices(matrices) -> List[dict]:
	return [MatrixJSON.from_array(M).model_dump(mode="json") for M in matrices]


def cmd_intertwine(args: argparse.Namespace, codec: InstanceCodec) -> int:
	wire, instance, policy = _load(args, codec)
	builder = IntertwinerBuilder(policy, max_workers=args.workers)
	report = ReportBuilder("intertwine", digest(wire))

	try:
		result = builder.construct_intertwiners(instance)
	except GenericPositionViolated as exc:
		logger.error(exc.detail)
		report.flag(f"generic_position[{exc.slot}]", False)
		if exc.report is not None:
			report.add_payload(meet_dims={str(exc.slot): list(exc.report.meet_dims)})
		return _emit_report(report.build(), args, args.out)
	except (VerificationError, NotInvertible) as exc:
		logger.error(exc.detail)
		if isinstance(exc, HalmosIdentityViolated):
			report.check("halmos", exc.residual, policy.eq_atol, passed=False)
		else:
			report.flag("invertible", False)
		_emit_report(report.build(), args, args.out)
		return exc.exit_code

	for i, gp in enumerate(result.generic_position, start=1):
		report.flag(f"generic_position[{i}]", gp.passed)
	for family, values in result.residual_families().items():
		report.residual_family(family, values, policy.eq_atol)
	if args.exchange:
		swapped = builder.construct_intertwiners(swap(instance))
		report.check("exchange", exchange_residual(result, swapped), policy.eq_atol)

	report.add_payload(
		T=_matrices(result.T),
		W=_matrices(result.W),
		absT=_matrices(result.absT),
		meet_dims=[list(gp.meet_dims) for gp in result.generic_position],
		halmos=list(result.halmos_res),
		diagnostics=result.diagnostics,
	)
	return _emit_report(report.build(), args, args.out)


def cmd_generate(args: argparse.Namespace, codec: InstanceCodec) -> int:
	try:
		text = args.spec.read_text(encoding="utf-8")
	except OSError as exc:
		raise SchemaError(f"cannot read generator spec {args.spec}: {exc}") from exc
	try:
		spec = GeneratorSpec.model_validate_json(text)
	except ValidationError as exc:
		raise SchemaError(f"invalid GeneratorSpec: {exc}") from exc
	policy = _policy(args, DEFAULT_POLICY)
	instance = InstanceGenerator(policy).generate(_with_seed(spec, args.seed))
	output: InstanceFile = codec.encode_instance(instance)
	_emit(canonical_json(output), args.out)
	return 0


COMMANDS = {
	"evaluate": cmd_evaluate,
	"reduce": cmd_reduce,
	"check-minimal": cmd_check_minimal,
	"intertwine": cmd_intertwine,
	"generate": cmd_generate,
}


def main(argv: Optional[List[str]] = None) -> int:
	args = build_parser().parse_args(argv)
	# no-op when the host process already configured logging
	logging.basicConfig(stream=sys.stderr, format=LOG_FORMAT)
	logging.getLogger().setLevel(logging.DEBUG if args.verbose else logging.WARNING)
	try:
		return COMMANDS[args.command](args, InstanceCodec())
	except ToolkitError as exc:
		# exit code travels on the exception class
		logger.error("%s: %s", type(exc).__name__, exc.detail)
		return exc.exit_code


if __name__ == "__main__":
	sys.exit(main())
