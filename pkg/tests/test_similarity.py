import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from antclust.errors import (
    ConfigError,
    DataError,
    DescriptorFormatError,
    DescriptorMismatchError,
    FeatureRangeError,
    MatrixParseError,
    MatrixRangeError,
    MatrixShapeError,
    MatrixSymmetryError,
)
from antclust.similarity import (
    DescriptorColumn,
    DescriptorSet,
    MatrixColumn,
    ScalarColumn,
    SimilarityMatrix,
    aggregate_similarity,
    descriptor_container_bytes,
    load_descriptor_input,
    load_descriptor_sets,
    load_scalar_csv,
    load_similarity_matrix,
    min_cross_hamming,
    normalize_scalar_features,
    pairwise_similarity,
    read_descriptor_hex,
    sim_descriptor_sets,
    sim_scalar,
    similarity_matrix,
    write_descriptor_container,
    write_similarity_matrix,
)

from helpers import min_hamming_oracle


# --------------------------------------------------------------------------
# scalars


@pytest.mark.parametrize("x,y,expected", [(0.5, 0.5, 1.0), (0.0, 1.0, 0.0), (0.2, 0.5, 0.7)])
def test_sim_scalar(x, y, expected):
    assert sim_scalar(x, y) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("x,y", [(-0.1, 0.5), (0.5, 1.2), (2.0, 3.0)])
def test_sim_scalar_range_errors(x, y):
    with pytest.raises(FeatureRangeError):
        sim_scalar(x, y)


def test_normalize_min_max():
    col = normalize_scalar_features(ScalarColumn([2.0, 4.0, 6.0]))
    assert col.values.tolist() == [0.0, 0.5, 1.0]


def test_normalize_already_normalized():
    col = normalize_scalar_features(ScalarColumn([0.0, 1.0]))
    assert col.values.tolist() == [0.0, 1.0]


def test_normalize_constant_column():
    col = normalize_scalar_features(ScalarColumn([3.0, 3.0, 3.0]))
    assert col.values.tolist() == [0.5, 0.5, 0.5]


def test_scalar_column_rejects_bad_input():
    with pytest.raises(DataError):
        ScalarColumn([])
    with pytest.raises(DataError):
        ScalarColumn([1.0, float("nan")])


def test_unnormalized_column_refuses_to_compare():
    col = ScalarColumn([2.0, 4.0])
    with pytest.raises(FeatureRangeError):
        col.sim(0, 1)
    with pytest.raises(FeatureRangeError):
        col.matrix()


# --------------------------------------------------------------------------
# aggregation


def test_aggregate_examples():
    assert aggregate_similarity([1.0, 0.5]) == 0.75
    assert aggregate_similarity([0.3]) == 0.3
    assert aggregate_similarity([0.0, 0.0, 1.0]) == pytest.approx(1 / 3, abs=1e-15)


def test_aggregate_empty_is_config_error():
    with pytest.raises(ConfigError):
        aggregate_similarity([])


def test_aggregate_range_checked():
    with pytest.raises(DataError):
        aggregate_similarity([0.5, 1.5])


# --------------------------------------------------------------------------
# descriptor sets


def test_descriptor_set_identity_similarity():
    s = DescriptorSet([bytes(range(32)), bytes(32)])
    assert sim_descriptor_sets(s, s) == 1.0


def test_descriptor_complement_similarity_zero():
    a = DescriptorSet([bytes(32)])
    b = DescriptorSet([bytes([0xFF]) * 32])
    assert sim_descriptor_sets(a, b) == 0.0


def test_descriptor_64_of_256_bits():
    # 8 bytes of 0xFF = 64 differing bits out of 256
    a = DescriptorSet([bytes(32)])
    b = DescriptorSet([bytes([0xFF]) * 8 + bytes(24)])
    assert min_hamming_oracle(a, b) == 64
    assert sim_descriptor_sets(a, b) == 0.75


def test_descriptor_width_mismatch():
    a = DescriptorSet([bytes(32)])
    b = DescriptorSet([bytes(16)])
    with pytest.raises(DescriptorMismatchError):
        sim_descriptor_sets(a, b)


def test_descriptor_set_validation():
    with pytest.raises(DescriptorFormatError):
        DescriptorSet([])
    with pytest.raises(DescriptorMismatchError):
        DescriptorSet([bytes(32), bytes(16)])


def test_best_match_uses_minimum_pair():
    base = bytes(32)
    near = bytes([0x01]) + bytes(31)  # 1 bit away
    far = bytes([0xFF]) * 32
    a = DescriptorSet([far, near])
    b = DescriptorSet([base])
    assert min_cross_hamming(a, b) == 1
    assert sim_descriptor_sets(a, b) == 1.0 - 1 / 256


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_min_hamming_matches_bruteforce_oracle(data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    na = data.draw(st.integers(1, 50))
    nb = data.draw(st.integers(1, 50))
    width = data.draw(st.sampled_from([4, 7, 16, 32]))
    a = DescriptorSet(rng.integers(0, 256, size=(na, width), dtype=np.uint8))
    b = DescriptorSet(rng.integers(0, 256, size=(nb, width), dtype=np.uint8))
    expected = min_hamming_oracle(a, b)
    assert min_cross_hamming(a, b, backend="pure") == expected
    assert min_cross_hamming(a, b) == expected


# --------------------------------------------------------------------------
# similarity matrices


def test_matrix_load_valid(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("2\n1 0.3\n0.3 1\n")
    m = load_similarity_matrix(path)
    assert m.n == 2
    assert m.values[0, 1] == 0.3
    assert m.values[0, 0] == 1.0


def test_matrix_bad_diagonal(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("2\n0.9 0.3\n0.3 1\n")
    with pytest.raises(MatrixRangeError) as err:
        load_similarity_matrix(path)
    assert "row 0" in str(err.value)


def test_matrix_out_of_range_entry(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("2\n1 1.2\n1.2 1\n")
    with pytest.raises(MatrixRangeError):
        load_similarity_matrix(path)


def test_matrix_asymmetry_named_cell(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("2\n1 0.3\n0.4 1\n")
    with pytest.raises(MatrixSymmetryError) as err:
        load_similarity_matrix(path)
    assert "row" in str(err.value) and "column" in str(err.value)


def test_matrix_parse_error(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("2\n1 abc\n0.3 1\n")
    with pytest.raises(MatrixParseError):
        load_similarity_matrix(path)


def test_matrix_shape_errors(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("3\n1 0.3\n0.3 1\n")
    with pytest.raises(MatrixShapeError):
        load_similarity_matrix(path)
    path.write_text("2\n1 0.3 0.5\n0.3 1 0.5\n")
    with pytest.raises(MatrixShapeError):
        load_similarity_matrix(path)
    path.write_text("x\n")
    with pytest.raises(MatrixParseError):
        load_similarity_matrix(path)


def test_matrix_subtolerance_asymmetry_canonicalized(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text(f"2\n1 {0.3 + 4e-10!r}\n0.3 1\n")
    m = load_similarity_matrix(path)
    assert m.values[0, 1] == m.values[1, 0]


def test_matrix_roundtrip(tmp_path):
    raw = np.array([[1.0, 0.25, 0.5], [0.25, 1.0, 0.75], [0.5, 0.75, 1.0]])
    path = tmp_path / "m.txt"
    write_similarity_matrix(path, raw)
    m = load_similarity_matrix(path)
    assert np.array_equal(m.values, raw)


# --------------------------------------------------------------------------
# pairwise similarity and full-matrix precompute


def test_pairwise_identity_is_one():
    cols = [ScalarColumn([0.1, 0.9]), DescriptorColumn([DescriptorSet([bytes(8)]), DescriptorSet([bytes([1]) * 8])])]
    assert pairwise_similarity(cols, 0, 0) == 1.0
    assert pairwise_similarity(cols, 1, 1) == 1.0


def test_pairwise_single_scalar_extremes():
    assert pairwise_similarity([ScalarColumn([0.0, 1.0])], 0, 1) == 0.0


def test_pairwise_mixed_columns_mean():
    scalar = ScalarColumn([0.2, 0.5])  # sim = 0.7
    matrix = MatrixColumn(SimilarityMatrix.from_array([[1.0, 0.9], [0.9, 1.0]]))
    assert pairwise_similarity([scalar, matrix], 0, 1) == pytest.approx(0.8, abs=1e-12)


def test_pairwise_requires_columns():
    with pytest.raises(ConfigError):
        pairwise_similarity([], 0, 1)


def _random_columns(rng, n):
    cols = [ScalarColumn(rng.uniform(0, 1, n))]
    width = 16
    sets = [
        DescriptorSet(rng.integers(0, 256, size=(rng.integers(1, 6), width), dtype=np.uint8))
        for _ in range(n)
    ]
    cols.append(DescriptorColumn(sets))
    raw = rng.uniform(0, 1, (n, n))
    sym = np.clip((raw + raw.T) / 2, 0, 1)
    np.fill_diagonal(sym, 1.0)
    cols.append(MatrixColumn(SimilarityMatrix.from_array(sym)))
    return cols


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_pairwise_symmetry_identity_range_fuzz(seed):
    rng = np.random.default_rng(seed)
    n = 8
    cols = _random_columns(rng, n)
    for i in range(n):
        assert pairwise_similarity(cols, i, i) == 1.0
        for j in range(n):
            s_ij = pairwise_similarity(cols, i, j)
            assert s_ij == pairwise_similarity(cols, j, i)
            assert 0.0 <= s_ij <= 1.0


@pytest.mark.parametrize("seed", [3, 4])
def test_full_matrix_matches_pairwise_exactly(seed):
    rng = np.random.default_rng(seed)
    n = 7
    cols = _random_columns(rng, n)
    for backend in ("pure", None):
        full = similarity_matrix(cols, backend=backend)
        for i in range(n):
            for j in range(n):
                assert full[i, j] == pairwise_similarity(cols, i, j)


def test_column_length_mismatch():
    with pytest.raises(DataError):
        similarity_matrix([ScalarColumn([0.1, 0.2]), ScalarColumn([0.1, 0.2, 0.3])])


# --------------------------------------------------------------------------
# descriptor container I/O


def _sample_sets(rng, items=3, width=32):
    return [
        DescriptorSet(rng.integers(0, 256, size=(rng.integers(1, 5), width), dtype=np.uint8))
        for _ in range(items)
    ]


def test_container_roundtrip(tmp_path):
    rng = np.random.default_rng(5)
    sets = _sample_sets(rng)
    path = tmp_path / "d.adsc"
    write_descriptor_container(path, sets)
    loaded = load_descriptor_sets(path)
    assert loaded == sets


def test_container_truncation(tmp_path):
    rng = np.random.default_rng(6)
    blob = descriptor_container_bytes(_sample_sets(rng))
    path = tmp_path / "d.adsc"
    path.write_bytes(blob[:-10])
    with pytest.raises(DescriptorFormatError) as err:
        load_descriptor_sets(path)
    assert "truncated" in str(err.value)


def test_container_bad_magic(tmp_path):
    path = tmp_path / "d.adsc"
    path.write_bytes(b"NOPE" + bytes(20))
    with pytest.raises(DescriptorFormatError):
        load_descriptor_sets(path)


def test_container_zero_descriptors(tmp_path):
    import struct

    path = tmp_path / "d.adsc"
    path.write_bytes(struct.pack("<4sII", b"ADSC", 1, 32) + struct.pack("<I", 0))
    with pytest.raises(DescriptorFormatError) as err:
        load_descriptor_sets(path)
    assert "zero descriptors" in str(err.value)


def test_container_trailing_bytes(tmp_path):
    rng = np.random.default_rng(7)
    blob = descriptor_container_bytes(_sample_sets(rng))
    path = tmp_path / "d.adsc"
    path.write_bytes(blob + b"\x00")
    with pytest.raises(DescriptorFormatError):
        load_descriptor_sets(path)


def test_hex_roundtrip_and_autodetect(tmp_path):
    hex_path = tmp_path / "d.hex"
    hex_path.write_text("00ff 0f0f\nffff\n")
    sets = read_descriptor_hex(hex_path)
    assert len(sets) == 2
    assert sets[0].descriptors == (b"\x00\xff", b"\x0f\x0f")
    bin_path = tmp_path / "d.adsc"
    write_descriptor_container(bin_path, sets)
    assert load_descriptor_input(bin_path) == sets
    assert load_descriptor_input(hex_path) == sets


def test_hex_mixed_widths(tmp_path):
    hex_path = tmp_path / "d.hex"
    hex_path.write_text("00ff\nffffffff\n")
    with pytest.raises(DescriptorFormatError) as err:
        read_descriptor_hex(hex_path)
    assert "width" in str(err.value)


def test_hex_invalid_token(tmp_path):
    hex_path = tmp_path / "d.hex"
    hex_path.write_text("zz\n")
    with pytest.raises(DescriptorFormatError):
        read_descriptor_hex(hex_path)


# --------------------------------------------------------------------------
# scalar CSV ingestion


def test_scalar_csv_with_header(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("f0,f1\n1.0,2.0\n3.0,4.0\n")
    cols = load_scalar_csv(path)
    assert len(cols) == 2
    assert cols[0].tolist() == [1.0, 3.0]


def test_scalar_csv_without_header(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("1.5\n2.5\n")
    (col,) = load_scalar_csv(path)
    assert col.tolist() == [1.5, 2.5]


def test_scalar_csv_errors(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("")
    with pytest.raises(DataError):
        load_scalar_csv(path)
    path.write_text("a,b\n1.0\n")
    with pytest.raises(DataError):
        load_scalar_csv(path)
    path.write_text("1.0,2.0\n3.0,x\n")
    with pytest.raises(DataError):
        load_scalar_csv(path)
