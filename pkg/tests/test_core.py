"""Tests for the core value types and seed derivation."""

import io

import numpy as np
import pytest

from rvlab.core import (
    HurstParam,
    MultiPath,
    RealPath,
    SeedSpec,
    StepFunction,
    UniformGrid,
    compensated_sum,
    write_path_csv,
)
from rvlab.errors import DomainError


class TestHurstParam:
    @pytest.mark.parametrize("h", [0.0, 1.0, -0.1, 1.5])
    def test_rejects_out_of_range(self, h):
        with pytest.raises(DomainError):
            HurstParam(h)

    def test_accepts_interior(self):
        assert HurstParam(0.5).h == 0.5
        assert HurstParam(0.01).h == 0.01

    def test_require_rough_rejects_half(self):
        with pytest.raises(DomainError, match="H < 1/2"):
            HurstParam(0.5).require_rough()
        HurstParam(0.49).require_rough()  # no raise


class TestUniformGrid:
    def test_nodes_span_zero_to_horizon(self):
        grid = UniformGrid(2.0, 8)
        nodes = grid.nodes()
        assert nodes[0] == 0.0
        assert nodes[-1] == 2.0
        assert np.all(np.diff(nodes) > 0)
        assert len(nodes) == 9

    def test_rejects_bad_parameters(self):
        with pytest.raises(DomainError):
            UniformGrid(0.0, 4)
        with pytest.raises(DomainError):
            UniformGrid(1.0, 0)

    def test_index_of_roundtrips_nodes(self):
        grid = UniformGrid(1.0, 7)
        for i in range(8):
            assert grid.index_of(grid.node(i)) == i
        with pytest.raises(DomainError):
            grid.index_of(0.123)


class TestPaths:
    def test_real_path_values_are_immutable(self):
        grid = UniformGrid(1.0, 2)
        path = RealPath(grid, np.array([0.0, 1.0, -1.0]))
        assert path.values.flags.writeable is False
        assert np.array_equal(path.increments(), [1.0, -2.0])

    def test_real_path_length_checked(self):
        with pytest.raises(DomainError):
            RealPath(UniformGrid(1.0, 2), np.zeros(4))

    def test_multipath_component_roundtrip(self):
        grid = UniformGrid(1.0, 2)
        values = np.array([[0.0, 0.0], [1.0, 2.0], [3.0, 4.0]])
        mp = MultiPath(grid, values)
        assert mp.dimension == 2
        assert np.array_equal(mp.component(1).values, [0.0, 2.0, 4.0])

    def test_multipath_zero_row_enforced(self):
        with pytest.raises(DomainError):
            MultiPath(UniformGrid(1.0, 1), np.array([[0.0, 0.1], [1.0, 1.0]]))


class TestStepFunction:
    def test_indicator_is_exact(self):
        grid = UniformGrid(1.0, 4)
        phi = StepFunction.indicator(grid, 3)
        assert np.array_equal(phi.coefficients, [1.0, 1.0, 1.0, 0.0])
        assert phi(0.0) == 1.0
        assert phi(0.74) == 1.0
        assert phi(0.75) == 0.0

    def test_domain_is_half_open(self):
        phi = StepFunction.indicator(UniformGrid(1.0, 4), 2)
        with pytest.raises(DomainError):
            phi(1.0)
        with pytest.raises(DomainError):
            phi(-0.01)

    def test_coefficients_length_checked(self):
        with pytest.raises(DomainError):
            StepFunction(UniformGrid(1.0, 4), np.zeros(3))


class TestSeedSpec:
    def test_stream_is_pure_function_of_fields(self):
        a = SeedSpec(123, 4).stream().standard_normal(8)
        b = SeedSpec(123, 4).stream().standard_normal(8)
        assert np.array_equal(a, b)

    def test_streams_differ_across_fields(self):
        base = SeedSpec(123, 4).stream().standard_normal(8)
        for other in (
            SeedSpec(124, 4).stream(),
            SeedSpec(123, 5).stream(),
            SeedSpec(123, 4).stream(component=1),
            SeedSpec(123, 4).stream(lane=1),
        ):
            assert not np.array_equal(base, other.standard_normal(8))

    def test_validation(self):
        with pytest.raises(DomainError):
            SeedSpec(-1)
        with pytest.raises(DomainError):
            SeedSpec(2**64)
        with pytest.raises(DomainError):
            SeedSpec(0, -1)

    def test_replicate_offsets_index(self):
        spec = SeedSpec(9, 3).replicate(4)
        assert spec.replication_index == 7
        assert spec.master_seed == 9


def test_compensated_sum_survives_cancellation():
    assert compensated_sum([1e16, 1.0, -1e16]) == 1.0
    assert compensated_sum([]) == 0.0


def test_write_path_csv_headers_and_values():
    grid = UniformGrid(1.0, 2)
    buf = io.StringIO()
    write_path_csv(RealPath(grid, [0.0, 0.5, 1.5]), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,value"
    assert lines[1] == "0.0,0.0"
    assert lines[2] == "0.5,0.5"
    assert len(lines) == 4
    # every cell must round-trip through float()
    for line in lines[1:]:
        assert all(float(cell) is not None for cell in line.split(","))

    buf = io.StringIO()
    write_path_csv(MultiPath(grid, np.zeros((3, 3))), buf)
    out = buf.getvalue().splitlines()
    assert out[0] == "t,v1,v2,v3"
    assert out[1] == "0.0,0.0,0.0,0.0"
