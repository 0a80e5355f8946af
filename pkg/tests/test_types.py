import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deepmp.errors import (
    DimensionMismatch,
    NegativeEntry,
    NotNormalized,
    NotOvercomplete,
    ParseError,
)
from deepmp.types import (
    Dictionary,
    load_dictionary_csv,
    read_csv_matrix,
    save_dictionary_csv,
    synthesize,
    validate_dictionary,
)


def unit_2x3():
    r = 1.0 / np.sqrt(2.0)
    return np.array([[1.0, 0.0, r], [0.0, 1.0, r]])


def test_validate_accepts_unit_columns():
    d = validate_dictionary(unit_2x3())
    assert isinstance(d, Dictionary)
    assert d.signal_dim == 2 and d.num_atoms == 3


def test_validate_rejects_negative_entry():
    atoms = unit_2x3()
    atoms[0, 0] = -0.1
    with pytest.raises(NegativeEntry):
        validate_dictionary(atoms)


def test_validate_rejects_undercomplete():
    with pytest.raises(NotOvercomplete):
        validate_dictionary(np.ones((3, 2)) / np.sqrt(3.0))


def test_validate_rejects_unnormalized_column():
    atoms = unit_2x3()
    atoms[:, 2] *= 1.001
    with pytest.raises(NotNormalized):
        validate_dictionary(atoms)


def test_validated_atoms_are_frozen():
    d = validate_dictionary(unit_2x3())
    with pytest.raises(ValueError):
        d.atoms[0, 0] = 5.0


def test_synthesize_unit_code_returns_atom():
    d = validate_dictionary(unit_2x3())
    code = np.zeros(3)
    code[1] = 1.0
    assert np.array_equal(synthesize(d, code), d.atom(1))


def test_synthesize_zero_code():
    d = validate_dictionary(unit_2x3())
    assert np.array_equal(synthesize(d, np.zeros(3)), np.zeros(2))


def test_synthesize_matches_direct_summation_oracle():
    rng = np.random.default_rng(5)
    atoms = np.abs(rng.standard_normal((5, 20)))
    atoms /= np.linalg.norm(atoms, axis=0)
    d = validate_dictionary(atoms)
    code = np.zeros(20)
    code[2] = 0.5
    code[7] = 0.25
    expected = 0.5 * atoms[:, 2] + 0.25 * atoms[:, 7]
    assert np.allclose(synthesize(d, code), expected, atol=1e-15)


def test_synthesize_rejects_wrong_length():
    d = validate_dictionary(unit_2x3())
    with pytest.raises(DimensionMismatch):
        synthesize(d, np.zeros(4))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_synthesize_is_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    atoms = np.abs(rng.standard_normal((6, 11)))
    atoms /= np.linalg.norm(atoms, axis=0)
    d = validate_dictionary(atoms)
    x = rng.standard_normal(11)
    z = rng.standard_normal(11)
    lhs = synthesize(d, a * x + b * z)
    rhs = a * synthesize(d, x) + b * synthesize(d, z)
    assert np.allclose(lhs, rhs, atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12), st.integers(1, 12))
def test_normalized_abs_random_matrix_always_validates(seed, rows, extra):
    rng = np.random.default_rng(seed)
    cols = rows + extra
    atoms = np.abs(rng.standard_normal((rows, cols)))
    atoms /= np.linalg.norm(atoms, axis=0)
    validate_dictionary(atoms)


def test_csv_round_trip_is_exact(tmp_path, small_dictionary):
    path = tmp_path / "dict.csv"
    save_dictionary_csv(small_dictionary, path)
    loaded = load_dictionary_csv(path)
    assert np.array_equal(loaded.atoms, small_dictionary.atoms)


def test_csv_header_line_is_ignored(tmp_path):
    path = tmp_path / "dict.csv"
    path.write_text("atom_a,atom_b,atom_c\n1.0,0.0,0.7071067811865476\n"
                    "0.0,1.0,0.7071067811865475\n")
    matrix = read_csv_matrix(path)
    assert matrix.shape == (2, 3)


def test_csv_parse_error_names_row_and_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1.0,2.0\n3.0,4.0\n5.0,oops\n")
    with pytest.raises(ParseError, match=r"row 3, column 2"):
        read_csv_matrix(path)


def test_csv_ragged_row_rejected(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("1.0,2.0\n3.0\n")
    with pytest.raises(ParseError):
        read_csv_matrix(path)
