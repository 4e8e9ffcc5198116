import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from palb.baselines import oracle_fit
from palb.core import (
    AffineNormalization,
    CompensatedAccumulator,
    Dataset,
    DatasetError,
    DatasetParseError,
    Line,
    denormalize,
    denormalize_line,
    normalize,
    objective_value,
    parse_dataset_csv,
)


class TestDataset:
    def test_rejects_empty(self):
        with pytest.raises(DatasetError):
            Dataset([], [])

    def test_rejects_nan_inf(self):
        with pytest.raises(DatasetError):
            Dataset([0.0, float("nan")], [0.0, 1.0])
        with pytest.raises(DatasetError):
            Dataset([0.0, 1.0], [0.0, float("inf")])

    def test_rejects_length_mismatch(self):
        with pytest.raises(DatasetError):
            Dataset([0.0, 1.0], [0.0])

    def test_immutable(self):
        ds = Dataset([0.0, 1.0], [2.0, 3.0])
        with pytest.raises(ValueError):
            ds.x[0] = 5.0
        with pytest.raises(AttributeError):
            ds.x = np.zeros(2)

    def test_source_arrays_are_copied(self):
        x = np.array([0.0, 1.0])
        ds = Dataset(x, [1.0, 2.0])
        x[0] = 99.0
        assert ds.x[0] == 0.0


class TestNormalize:
    def test_two_point_symmetric(self):
        ds, tr = normalize(Dataset([0.0, 10.0], [0.0, 20.0]))
        assert list(ds.x) == [-1.0, 1.0]
        assert list(ds.y) == [-1.0, 1.0]
        assert (tr.sigma_x, tr.tau_x, tr.sigma_y, tr.tau_y) == (5.0, 5.0, 10.0, 10.0)

    def test_zero_extent_clamps(self):
        c = 3.5
        ds, tr = normalize(Dataset([c], [c]))
        assert list(ds.x) == [0.0] and list(ds.y) == [0.0]
        assert tr.sigma_x == 1.0 and tr.sigma_y == 1.0
        assert tr.tau_x == c and tr.tau_y == c

    def test_result_in_unit_square_with_zero_centroid(self, rng):
        ds = Dataset(rng.normal(3.0, 10.0, 100), rng.normal(-7.0, 0.5, 100))
        nds, _ = normalize(ds)
        assert np.abs(nds.x).max() <= 1.0 and np.abs(nds.y).max() <= 1.0
        assert abs(np.mean(nds.x)) < 1e-14 and abs(np.mean(nds.y)) < 1e-14

    def test_round_trip(self, rng):
        ds = Dataset(rng.uniform(-50.0, 50.0, 100), rng.uniform(-1e-3, 1e-3, 100))
        nds, tr = normalize(ds)
        back = denormalize(nds, tr)
        scale_x = max(np.abs(ds.x).max(), 1.0)
        scale_y = max(np.abs(ds.y).max(), 1.0)
        assert np.abs(back.x - ds.x).max() <= 1e-12 * scale_x
        assert np.abs(back.y - ds.y).max() <= 1e-12 * scale_y

    def test_invalid_transform_rejected(self):
        with pytest.raises(ValueError):
            AffineNormalization(0.0, 1.0, 0.0, 0.0)


class TestDenormalizeLine:
    def test_known_transform(self):
        line = denormalize_line(Line(1.0, 0.0), AffineNormalization(5.0, 10.0, 5.0, 10.0))
        assert line == Line(2.0, 0.0)
        # y = 2x passes through (0,0) and (10,20)
        assert objective_value(Dataset([0.0, 10.0], [0.0, 20.0]), line) == 0.0

    def test_identity(self):
        line = Line(1.25, -0.5)
        assert denormalize_line(line, AffineNormalization.identity()) == line

    def test_objective_equivariance(self, rng):
        # f_original(back-transformed line) == sigma_y * f_normalized(line)
        for _ in range(20):
            ds = Dataset(rng.uniform(-5.0, 5.0, 40), rng.uniform(-5.0, 5.0, 40))
            nds, tr = normalize(ds)
            line_n = Line(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0))
            f_orig = objective_value(ds, denormalize_line(line_n, tr))
            f_norm = objective_value(nds, line_n)
            assert f_orig == pytest.approx(tr.sigma_y * f_norm, rel=1e-9)

    def test_argmin_invariance(self, rng):
        # Oracle optimum scales by sigma_y under normalization.
        for _ in range(10):
            n = int(rng.integers(3, 12))
            ds = Dataset(rng.uniform(-4.0, 9.0, n), rng.uniform(-20.0, 5.0, n))
            if ds.x.min() == ds.x.max():
                continue
            nds, tr = normalize(ds)
            assert oracle_fit(ds).objective == pytest.approx(
                tr.sigma_y * oracle_fit(nds).objective, rel=1e-9)


class TestCompensatedAccumulator:
    def test_matches_fsum_exactly_on_mixed_magnitudes(self, rng):
        values = list(rng.uniform(-1.0, 1.0, 500) * 10.0 ** rng.integers(-12, 12, 500))
        acc = CompensatedAccumulator()
        acc.extend(values)
        assert acc.value == pytest.approx(math.fsum(values), rel=1e-15)

    def test_alternating_magnitudes_exact_where_naive_fails(self):
        # 1e6 values alternating between 1 and 1e-16
        values = [1.0 if i % 2 == 0 else 1e-16 for i in range(10**6)]
        acc = CompensatedAccumulator()
        acc.extend(values)
        expected = math.fsum(values)  # exactly rounded
        naive = 0.0
        for v in values:
            naive += v
        assert acc.value == expected
        assert naive != expected

    def test_running_reads(self):
        acc = CompensatedAccumulator(1.0)
        acc.add(1e-16)
        acc.add(1e-16)
        assert acc.value == 1.0 + 2e-16


class TestCsvParsing:
    def test_basic_with_header(self):
        ds = parse_dataset_csv("x,y\n0,0\n1,1\n")
        assert list(ds.x) == [0.0, 1.0]

    def test_basic_without_header(self):
        ds = parse_dataset_csv("0.5,2\n1.5,-3\n")
        assert list(ds.y) == [2.0, -3.0]

    def test_crlf(self):
        ds = parse_dataset_csv("x,y\r\n1,2\r\n3,4\r\n")
        assert list(ds.x) == [1.0, 3.0]

    def test_rejects_nan_with_line_number(self):
        with pytest.raises(DatasetParseError) as err:
            parse_dataset_csv("x,y\n0,1\nNaN,2\n")
        assert err.value.line_number == 3

    def test_rejects_inf(self):
        with pytest.raises(DatasetParseError):
            parse_dataset_csv("1,inf\n")

    def test_rejects_garbage_with_line_number(self):
        with pytest.raises(DatasetParseError) as err:
            parse_dataset_csv("0,0\n1,1\nfoo,bar\n")
        assert err.value.line_number == 3

    def test_rejects_wrong_field_count(self):
        with pytest.raises(DatasetParseError) as err:
            parse_dataset_csv("0,0,0\n")
        assert err.value.line_number == 1

    def test_rejects_empty(self):
        with pytest.raises(DatasetParseError):
            parse_dataset_csv("x,y\n")


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(
    st.floats(-1e6, 1e6, allow_nan=False),
    st.floats(-1e6, 1e6, allow_nan=False)), min_size=1, max_size=50))
def test_normalize_round_trip_property(points):
    ds = Dataset.from_points(points)
    nds, tr = normalize(ds)
    assert np.abs(nds.x).max() <= 1.0 and np.abs(nds.y).max() <= 1.0
    back = denormalize(nds, tr)
    sx = max(1.0, float(np.abs(ds.x).max()))
    sy = max(1.0, float(np.abs(ds.y).max()))
    assert np.abs(back.x - ds.x).max() <= 1e-12 * sx
    assert np.abs(back.y - ds.y).max() <= 1e-12 * sy
