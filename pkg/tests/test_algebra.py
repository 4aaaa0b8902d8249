import numpy as np
import pytest

from errors import NotARepresentation, NotInAlgebra, NotUnital, ShapeError
from models import AlgebraElement, AlgebraPresentation, Representation
from services.algebra import (
    SIGMA_X,
    SIGMA_Z,
    amplify,
    basis_elements,
    commutant_basis,
    commutation_residual,
    diagonal_algebra,
    direct_sum,
    element_from_matrix,
    evaluate_element,
    from_matrices,
    identity_representation,
    matrix_algebra,
    pauli_algebra,
    verify_representation,
    word_basis,
)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_matrix_algebra_spans_full_matrices(n):
    words, C = word_basis(matrix_algebra(n))
    assert len(words) == n * n
    assert words[0] == ()
    assert C.shape == (n * n, n * n)


def test_diagonal_algebra_dimension():
    words, _ = word_basis(diagonal_algebra(3))
    assert len(words) == 3


def test_pauli_words_span_m2(pauli):
    words, _ = word_basis(pauli)
    assert len(words) == 4
    assert len(basis_elements(pauli)) == 4


@pytest.mark.parametrize("alg", [matrix_algebra(2), diagonal_algebra(3), pauli_algebra(), from_matrices("M3-shift", [np.diag(np.ones(2), 1)])])
def test_word_basis_dimension_survives_unitary_conjugation(alg):
    rng = np.random.default_rng(21)
    n = alg.ambient_dim
    U, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    rotated = AlgebraPresentation(f"{alg.label}-rotated", tuple(U @ g @ U.conj().T for g in alg.gen_matrices), alg.adjoint_map)
    assert len(word_basis(rotated)[0]) == len(word_basis(alg)[0])


def test_non_unital_generators_are_rejected():
    nilpotent = np.array([[0, 1], [0, 0]], dtype=complex)
    corner = AlgebraPresentation("corner", (np.diag([1.0, 0.0]).astype(complex),), (0,))
    with pytest.raises(NotUnital):
        word_basis(corner)
    # adjoint missing from the generator list
    with pytest.raises(ShapeError):
        AlgebraPresentation("bad", (nilpotent,), (1,))


def test_from_matrices_appends_adjoints():
    nilpotent = np.array([[0, 1], [0, 0]], dtype=complex)
    alg = from_matrices("M2-shift", [nilpotent])
    assert alg.gen_count == 2
    assert alg.adjoint_map == (1, 0)
    assert np.allclose(alg.gen_matrices[1], nilpotent.T)


def test_evaluate_respects_adjoint(pauli):
    rep = identity_representation(pauli)
    x = AlgebraElement.generator(0, 2j) * AlgebraElement.generator(1) + AlgebraElement.unit()
    value = evaluate_element(rep, x)
    star = evaluate_element(rep, x.adjoint(pauli.adjoint_map))
    assert np.allclose(star, value.conj().T)
    assert np.allclose(value, 2j * SIGMA_X @ SIGMA_Z + np.eye(2))


def test_evaluate_rejects_unknown_generator(pauli):
    with pytest.raises(ShapeError):
        evaluate_element(identity_representation(pauli), AlgebraElement.generator(5))


def test_amplification_is_a_representation(pauli):
    rep = amplify(pauli, 3)
    assert rep.dim == 6
    report = verify_representation(rep)
    assert report.max_residual < 1e-10
    assert report.relations_checked == 4 * 2


def test_broken_relation_is_detected(pauli):
    # sigma_x -> sigma_x, sigma_z -> sigma_x violates sigma_x sigma_z = -sigma_z sigma_x
    rep = Representation(pauli, (SIGMA_X, SIGMA_X))
    with pytest.raises(NotARepresentation):
        verify_representation(rep)


def test_non_selfadjoint_image_is_detected(pauli):
    rep = Representation(pauli, (SIGMA_X, 1j * SIGMA_Z))
    with pytest.raises(NotARepresentation):
        verify_representation(rep)


def test_element_from_matrix_round_trip():
    alg = matrix_algebra(2)
    a = np.array([[1, 2j], [3, 4]], dtype=complex)
    x = element_from_matrix(alg, a)
    assert np.allclose(evaluate_element(identity_representation(alg), x), a)


def test_element_outside_algebra():
    with pytest.raises(NotInAlgebra):
        element_from_matrix(diagonal_algebra(2), SIGMA_X)


def test_commutant_of_amplification(pauli):
    # a (x) I_2 has commutant I_2 (x) M_2
    basis = commutant_basis(amplify(pauli, 2))
    assert len(basis) == 4
    rep = amplify(pauli, 2)
    for S in basis:
        assert commutation_residual(S, rep) < 1e-10


def test_commutant_of_direct_sum_of_inequivalent_pieces():
    alg = diagonal_algebra(2)
    rep = identity_representation(alg)
    assert len(commutant_basis(rep)) == 2
    assert len(commutant_basis(direct_sum(rep, rep))) == 8
