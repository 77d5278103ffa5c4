import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SYSTEMS
from wavelq import (
    HyperbolicSystem,
    MatrixField,
    ScalarField,
    SchemaError,
    SpatialGrid,
    StateProfile,
    load_system,
    sample_at,
    save_system,
    system_to_dict,
    validate_system,
)
from wavelq.examples import build_heat_exchanger, build_strings
from wavelq.model import interpolate


def _simple(n=2, p=1, m=1, K=None, cells=8):
    g = SpatialGrid(cells)
    return HyperbolicSystem(
        ScalarField.constant(g, 1.0), MatrixField.zeros(g, n),
        np.eye(n) if K is None else K, np.zeros((n, n)),
        np.zeros((m, n)), np.zeros((m, n)), p,
    )


class TestGrid:
    def test_nodes(self):
        g = SpatialGrid(4)
        np.testing.assert_array_equal(g.nodes, [0, 0.25, 0.5, 0.75, 1.0])
        assert g.size == 5 and g.step == 0.25

    @pytest.mark.parametrize("bad", [0, -3, 2.5])
    def test_rejects_bad_cell_count(self, bad):
        with pytest.raises(ValueError):
            SpatialGrid(bad)

    def test_nodes_read_only(self):
        with pytest.raises(ValueError):
            SpatialGrid(3).nodes[0] = 1.0


class TestSampleAt:
    def test_constant_field(self):
        f = ScalarField.constant(SpatialGrid(10), 1.0)
        assert sample_at(f, 0.37) == 1.0

    def test_midpoint_single_cell(self):
        f = ScalarField(SpatialGrid(1), [1.0, 3.0])
        assert sample_at(f, 0.5) == 2.0

    def test_exact_at_nodes(self):
        g = SpatialGrid(7)
        vals = np.sin(np.arange(8) * 1.3) + 1e-3 * np.pi
        f = ScalarField(g, vals)
        for k, z in enumerate(g.nodes):
            assert sample_at(f, z) == vals[k]

    def test_matrix_field(self):
        g = SpatialGrid(2)
        f = MatrixField(g, np.stack([np.eye(2) * k for k in range(3)]))
        np.testing.assert_allclose(sample_at(f, 0.25), 0.5 * np.eye(2))

    def test_outside_interval(self):
        with pytest.raises(ValueError):
            sample_at(ScalarField.constant(SpatialGrid(2), 1.0), 1.5)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=30), st.floats(0, 1), st.floats(0, 1))
    def test_monotone_between_nodes(self, raw, a, b):
        vals = np.sort(np.asarray(raw))
        f = ScalarField(SpatialGrid(len(vals) - 1), vals)
        lo, hi = sorted((a, b))
        assert sample_at(f, lo) <= sample_at(f, hi) + 1e-12 * (1 + abs(vals).max())

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 40), st.data())
    def test_node_exactness_property(self, cells, data):
        g = SpatialGrid(cells)
        vals = np.asarray(data.draw(st.lists(st.floats(-1e6, 1e6), min_size=g.size, max_size=g.size)))
        np.testing.assert_array_equal(interpolate(g, vals, g.nodes), vals)


class TestSystem:
    def test_input_selector(self):
        sys = _simple(n=4, p=2)
        S = sys.input_selector
        assert S.shape == (4, 2)
        np.testing.assert_array_equal(S[2:], np.eye(2))
        np.testing.assert_array_equal(S[:2], 0)
        np.testing.assert_array_equal(S.T @ S, np.eye(2))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 8), st.data())
    def test_input_selector_property(self, n, data):
        p = data.draw(st.integers(1, n))
        S = _simple(n=n, p=p).input_selector
        assert np.count_nonzero(S) == p
        np.testing.assert_array_equal(S.T @ S, np.eye(p))
        np.testing.assert_array_equal(S[n - p:], np.eye(p))

    def test_inconsistent_dimensions(self):
        g = SpatialGrid(4)
        with pytest.raises(ValueError, match="inconsistent"):
            HyperbolicSystem(ScalarField.constant(g, 1.0), MatrixField.zeros(g, 2),
                             np.eye(2), np.zeros((3, 3)), np.zeros((1, 2)), np.zeros((1, 2)), 1)

    def test_profile_shape_check(self):
        with pytest.raises(ValueError):
            StateProfile(SpatialGrid(4), np.zeros((3, 2)))


class TestValidate:
    def test_heat_exchanger_well_posed(self):
        rep = validate_system(build_heat_exchanger())
        assert rep.well_posed and rep.k_invertible

    def test_strings_well_posed(self):
        sys = build_strings()
        assert np.isclose(np.linalg.det(sys.K), 1.0)
        assert validate_system(sys).well_posed

    def test_zero_k(self):
        rep = validate_system(_simple(K=np.zeros((2, 2))))
        assert not rep.well_posed and not rep.k_invertible

    def test_nonpositive_speed(self):
        g = SpatialGrid(4)
        sys = HyperbolicSystem(ScalarField(g, [1, 1, 0, 1, 1]), MatrixField.zeros(g, 1),
                               [[1.0]], [[0.0]], [[0.0]], [[0.0]], 1)
        rep = validate_system(sys)
        assert not rep.lambda0_positive and not rep.well_posed
        assert "NOT positive" in str(rep)

    def test_report_dict(self):
        d = validate_system(build_strings()).to_dict()
        assert d["n"] == 6 and d["p"] == 3 and d["m"] == 2


class TestJson:
    def test_round_trip(self, tmp_path):
        sys = build_strings(grid_cells=16)
        save_system(sys, tmp_path / "s.json")
        back = load_system(tmp_path / "s.json")
        for name in ("K", "L", "Ky", "Ly"):
            np.testing.assert_array_equal(getattr(back, name), getattr(sys, name))
        assert back.p == 3 and back.grid.num_cells == 16

    def test_shipped_files_load(self):
        for name in ("strings.json", "heat-exchanger.json"):
            assert validate_system(load_system(SYSTEMS / name)).well_posed

    def test_missing_field_named(self):
        doc = system_to_dict(build_heat_exchanger(grid_cells=4))
        del doc["Ly"]
        with pytest.raises(SchemaError) as exc:
            load_system(doc)
        assert exc.value.field == "Ly" and "Ly" in str(exc.value)

    def test_malformed_json(self):
        with pytest.raises(SchemaError, match="malformed"):
            load_system("{not json")

    def test_wrong_shape(self):
        doc = system_to_dict(build_heat_exchanger(grid_cells=4))
        doc["K"] = [[1.0]]
        with pytest.raises(SchemaError) as exc:
            load_system(doc)
        assert exc.value.field == "K"

    def test_sampled_fields_resampled(self):
        g = SpatialGrid(4)
        sys = HyperbolicSystem(ScalarField(g, 1 + g.nodes), MatrixField.zeros(g, 1),
                               [[1.0]], [[0.0]], [[0.0]], [[0.0]], 1)
        doc = json.loads(json.dumps(system_to_dict(sys)))
        fine = load_system(doc, grid_cells=8)
        np.testing.assert_allclose(fine.lambda0.values, 1 + fine.grid.nodes, atol=1e-15)
