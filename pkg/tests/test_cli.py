import json
from pathlib import Path

import numpy as np
import pytest

from errors import HalmosIdentityViolated
from main import main
from models import MapInstance, Representation, StinespringData
from schemas import MatrixJSON
from services.instance_codec import InstanceCodec, canonical_json
from services.intertwiner import IntertwinerBuilder

SIGMA_X = [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]
SIGMA_Z = [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]


def _matrix(data):
    return {"rows": len(data), "cols": len(data[0]), "data": data}


@pytest.fixture
def codec():
    return InstanceCodec()


@pytest.fixture
def write(tmp_path):
    def _write(name, document):
        path = tmp_path / name
        path.write_text(document if isinstance(document, str) else json.dumps(document), encoding="utf-8")
        return str(path)

    return _write


@pytest.fixture
def identity_instance(codec, write, identity_dilation, pauli):
    return write("identity.json", canonical_json(codec.encode_instance(MapInstance((pauli,), identity_dilation))))


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_generate_round_trip_is_byte_identical(capsys, codec, write, tmp_path):
    spec = write("spec.json", {"kind": "random_instance", "k": 2, "slot_algebra_dims": [2, 1], "multiplicities": [2, 3], "dim_g": 2, "dim_h": 1, "pair": True})
    out = tmp_path / "instance.json"
    code, _ = _run(capsys, ["generate", spec, "--seed", "3", "--out", str(out)])
    assert code == 0
    text = out.read_text(encoding="utf-8")
    assert canonical_json(codec.parse_instance(text)) == text

    again = tmp_path / "again.json"
    _run(capsys, ["generate", spec, "--seed", "3", "--out", str(again)])
    assert again.read_text(encoding="utf-8") == text


def test_evaluate_identity_dilation(capsys, write, identity_instance):
    args = write("args.json", {"arguments": [{"terms": [{"coeff": [1, 0], "word": [0]}]}]})
    code, out = _run(capsys, ["evaluate", identity_instance, args])
    assert code == 0
    report = json.loads(out)
    value = MatrixJSON(**report["payload"]["value"]).to_array()
    assert np.allclose(value, [[0, 1], [1, 0]])


def test_evaluate_zero_argument(capsys, write, identity_instance):
    args = write("args.json", {"arguments": [{"terms": []}]})
    code, out = _run(capsys, ["evaluate", identity_instance, args])
    assert code == 0
    assert np.allclose(MatrixJSON(**json.loads(out)["payload"]["value"]).to_array(), 0)


def test_evaluate_spectral_triple_instance(capsys, write):
    instance = write("triple.json", {
        "generator": {
            "kind": "spectral_triple",
            "k": 1,
            "slot_algebra_dims": [2],
            "payload": {"D": _matrix(SIGMA_X), "xi": _matrix([[[1, 0]], [[0, 0]]])},
        }
    })
    args = write("args.json", {"arguments": [{"matrix": _matrix(SIGMA_X)}, {"matrix": _matrix(SIGMA_Z)}]})
    code, out = _run(capsys, ["evaluate", instance, args])
    assert code == 0
    value = MatrixJSON(**json.loads(out)["payload"]["value"]).to_array()
    assert value.shape == (1, 1)
    assert abs(value[0, 0] - 2) < 1e-12


def test_schema_errors_exit_with_2(capsys, write, identity_instance):
    assert main(["check-minimal", write("broken.json", "{not json")]) == 2
    document = json.loads(Path(identity_instance).read_text(encoding="utf-8"))
    document["version"] = "0.1"
    assert main(["check-minimal", write("old.json", document)]) == 2
    both = dict(document, version="1.0", generator={"kind": "random_instance"})
    assert main(["check-minimal", write("both.json", both)]) == 2
    assert main(["check-minimal", identity_instance, "--tolerance-eq", "2"]) == 2


def test_shape_errors_exit_with_3(capsys, write, identity_instance):
    document = json.loads(Path(identity_instance).read_text(encoding="utf-8"))
    document["representations"][0]["X"][1] = _matrix([[[1, 0]], [[0, 0]], [[0, 0]]])
    assert main(["check-minimal", write("shape.json", document)]) == 3


def test_check_minimal_reports_failure(capsys, write):
    instance = write("cp.json", {
        "generator": {
            "kind": "cp_dilation",
            "slot_algebra_dims": [2],
            "payload": {"kraus": [_matrix([[[0, 0], [0, 0]], [[0, 0], [0, 0]]]), _matrix(SIGMA_X)]},
        }
    })
    code, out = _run(capsys, ["check-minimal", instance])
    assert code == 1
    report = json.loads(out)
    assert report["payload"]["A"]["right_dims"] == [2]
    assert report["passed"] is False

    code, out = _run(capsys, ["reduce", instance])
    assert code == 0
    report = json.loads(out)
    assert report["payload"]["A_slot_dims"] == {"before": [4], "after": [2]}


def test_reduce_writes_instance_and_is_deterministic(capsys, write, tmp_path):
    instance = write("random.json", {"generator": {"kind": "random_instance", "seed": 5, "k": 2, "slot_algebra_dims": [2, 2], "multiplicities": [2, 2]}})
    out = tmp_path / "reduced.json"
    code, first = _run(capsys, ["reduce", instance, "--out", str(out)])
    assert code == 0
    code, second = _run(capsys, ["reduce", instance, "--out", str(out)])
    first, second = json.loads(first), json.loads(second)
    first.pop("wall_time_s")
    second.pop("wall_time_s")
    assert first == second

    code, _ = _run(capsys, ["check-minimal", str(out)])
    assert code == 0


def test_intertwine_generated_pair(capsys, write):
    instance = write("pair.json", {"generator": {"kind": "random_instance", "seed": 2, "k": 2, "slot_algebra_dims": [2, 2], "multiplicities": [1, 2], "dim_g": 2, "dim_h": 2, "pair": True}})
    code, out = _run(capsys, ["intertwine", instance, "--workers", "2", "--exchange"])
    report = json.loads(out)
    assert code == 0
    assert report["passed"] is True
    assert len(report["payload"]["T"]) == 2
    assert report["payload"]["meet_dims"] == [[0, 0, 0, 0], [0, 0, 0, 0]]
    assert any(check["name"] == "exchange" for check in report["checks"])


def test_intertwine_non_minimal_pair_exits_with_4(capsys, codec, write, generator, make_spec):
    base = generator.random_instance(make_spec(5, multiplicities=[3, 3], dim_g=1, dim_h=1)).representation_a
    instance = write("pair.json", canonical_json(codec.encode_instance(MapInstance(tuple(base.algebras), base, base))))
    assert main(["intertwine", instance]) == 4


def test_pretty_format(capsys, identity_instance):
    code, out = _run(capsys, ["check-minimal", identity_instance, "--format", "pretty"])
    assert code == 0
    assert "overall: PASS" in out
    assert "A.right_span[1]" in out


def test_images_breaking_a_relation_exit_with_4(capsys, codec, write, pauli, sigma_x, sigma_z):
    # sigma_z^2 = I holds for the defining matrices but not for 2 sigma_z
    rep = Representation(pauli, (sigma_x, 2 * sigma_z))
    eye = np.eye(2, dtype=complex)
    instance = write("broken_rep.json", canonical_json(codec.encode_instance(MapInstance((pauli,), StinespringData((rep,), (eye, eye))))))
    assert main(["check-minimal", instance]) == 4
    assert main(["reduce", instance]) == 4
    assert capsys.readouterr().out == ""


def test_presentation_without_adjoints_exits_with_4(capsys, write, identity_instance):
    document = json.loads(Path(identity_instance).read_text(encoding="utf-8"))
    shift = _matrix([[[0, 0], [1, 0]], [[0, 0], [0, 0]]])
    document["algebras"][0]["generators"] = [shift, shift]
    document["representations"][0]["slots"][0]["images"] = [shift, shift]
    assert main(["check-minimal", write("shift.json", document)]) == 4


def test_failed_intertwiner_check_still_writes_a_report(capsys, monkeypatch, codec, write, pauli, identity_dilation):
    def fail(self, instance):
        raise HalmosIdentityViolated("K-block differs", 1e-3)

    monkeypatch.setattr(IntertwinerBuilder, "construct_intertwiners", fail)
    instance = write("pair.json", canonical_json(codec.encode_instance(MapInstance((pauli,), identity_dilation, identity_dilation))))
    code, out = _run(capsys, ["intertwine", instance])
    assert code == 1
    report = json.loads(out)
    assert report["passed"] is False
    assert [check["name"] for check in report["checks"]] == ["halmos"]


def test_errors_reach_already_installed_log_handlers(caplog, write):
    assert main(["check-minimal", write("broken.json", "{not json")]) == 2
    assert any(record.levelname == "ERROR" and "SchemaError" in record.getMessage() for record in caplog.records)
