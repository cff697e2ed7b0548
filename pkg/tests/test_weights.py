"""Tests for contiguity construction, parsing, and serialization."""

import json

import numpy as np
import pytest

from smaup import (
    AdjacencyParseError,
    GeoJSONError,
    InvalidDimensionError,
    SpatialWeights,
    build_lattice_rook,
    from_adjacency_text,
    from_geojson,
    is_connected,
    to_adjacency_text,
)


def grid_edge_count_oracle(rows: int, cols: int) -> int:
    """Count shared grid edges by direct enumeration."""
    count = 0
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                count += 1
            if r + 1 < rows:
                count += 1
    return count


def bfs_component_size(neighbors, start=0) -> int:
    seen = {start}
    stack = [start]
    while stack:
        i = stack.pop()
        for j in neighbors[i]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen)


def square_feature(x, y, size=1.0):
    return {
        "type": "Feature",
        "properties": {},
        "geometry": {
            "type": "Polygon",
            "coordinates": [[
                [x, y], [x + size, y], [x + size, y + size], [x, y + size], [x, y],
            ]],
        },
    }


def square_grid_geojson(rows, cols):
    features = [square_feature(float(c), float(r)) for r in range(rows) for c in range(cols)]
    return json.dumps({"type": "FeatureCollection", "features": features})


class TestLattice:
    def test_smallest_lattice(self):
        w = build_lattice_rook(1, 2)
        assert w.n == 2
        assert w.neighbors == ((1,), (0,))
        assert w.weights == ((1.0,), (1.0,))

    def test_3x3_structure(self):
        w = build_lattice_rook(3, 3)
        center = 4
        assert w.neighbors[center] == (1, 3, 5, 7)
        assert w.weights[center] == (0.25, 0.25, 0.25, 0.25)
        for corner in (0, 2, 6, 8):
            assert len(w.neighbors[corner]) == 2
            assert w.weights[corner] == (0.5, 0.5)

    def test_30x30_edge_count_matches_enumeration(self):
        w = build_lattice_rook(30, 30)
        assert w.n == 900
        assert w.edge_count == grid_edge_count_oracle(30, 30) == 1740

    @pytest.mark.parametrize("rows,cols", [(0, 5), (5, 0), (-1, 3), (1, 1)])
    def test_invalid_dimensions(self, rows, cols):
        with pytest.raises(InvalidDimensionError):
            build_lattice_rook(rows, cols)

    def test_area_count_overflow(self):
        with pytest.raises(InvalidDimensionError, match="cap"):
            build_lattice_rook(10**5, 10**5)

    def test_raw_mode_binary_weights(self):
        w = build_lattice_rook(3, 3, standardized=False)
        assert not w.standardized
        assert all(val == 1.0 for row in w.weights for val in row)


class TestAdjacencyText:
    def test_two_area_file_matches_lattice(self):
        w = from_adjacency_text("0: 1\n1: 0")
        assert w == build_lattice_rook(1, 2)

    def test_path_graph_weights(self):
        w = from_adjacency_text("0: 1\n1: 0 2\n2: 1")
        assert w.weights[1] == (0.5, 0.5)
        assert w.weights[0] == (1.0,)

    def test_lattice_dump_round_trip(self):
        original = build_lattice_rook(3, 3)
        assert from_adjacency_text(to_adjacency_text(original)) == original

    def test_comments_and_blank_lines(self):
        w = from_adjacency_text("# contiguity\n\n0: 1  # right\n1: 0\n")
        assert w.n == 2

    def test_self_loop_names_line(self):
        with pytest.raises(AdjacencyParseError, match="line 2"):
            from_adjacency_text("0: 1\n1: 0 1")

    def test_non_consecutive_ids(self):
        with pytest.raises(AdjacencyParseError, match="consecutive"):
            from_adjacency_text("0: 2\n2: 0")

    def test_empty_file(self):
        with pytest.raises(AdjacencyParseError, match="empty"):
            from_adjacency_text("# only comments\n")

    def test_missing_separator_names_line(self):
        with pytest.raises(AdjacencyParseError, match="line 1"):
            from_adjacency_text("0 1")

    def test_asymmetric_input_repaired_with_warning(self):
        with pytest.warns(UserWarning, match="2 reciprocal"):
            w = from_adjacency_text("0: 1 2\n1:\n2:")
        assert w.neighbors[1] == (0,)
        assert w.neighbors[2] == (0,)


class TestGeoJSON:
    def test_two_squares_sharing_edge(self):
        doc = json.dumps({
            "type": "FeatureCollection",
            "features": [square_feature(0, 0), square_feature(1, 0)],
        })
        w = from_geojson(doc)
        assert w.neighbors == ((1,), (0,))

    def test_2x2_block_excludes_diagonals(self):
        w = from_geojson(square_grid_geojson(2, 2))
        assert all(len(row) == 2 for row in w.neighbors)
        # diagonal pairs share only a corner point
        assert 3 not in w.neighbors[0]
        assert 2 not in w.neighbors[1]

    def test_5x5_grid_equals_lattice(self):
        assert from_geojson(square_grid_geojson(5, 5)) == build_lattice_rook(5, 5)

    def test_corner_touch_is_not_adjacency(self):
        doc = json.dumps({
            "type": "FeatureCollection",
            "features": [square_feature(0, 0), square_feature(1, 1)],
        })
        w = from_geojson(doc)
        assert w.neighbors == ((), ())

    def test_multipolygon_supported(self):
        multi = {
            "type": "Feature",
            "properties": {},
            "geometry": {
                "type": "MultiPolygon",
                "coordinates": [square_feature(0, 0)["geometry"]["coordinates"]],
            },
        }
        doc = json.dumps({
            "type": "FeatureCollection",
            "features": [multi, square_feature(1, 0)],
        })
        assert from_geojson(doc).neighbors == ((1,), (0,))

    def test_malformed_json(self):
        with pytest.raises(GeoJSONError, match="malformed"):
            from_geojson("{not json")

    def test_non_polygon_geometry(self):
        doc = json.dumps({
            "type": "FeatureCollection",
            "features": [
                {"type": "Feature", "geometry": {"type": "Point", "coordinates": [0, 0]}},
                square_feature(0, 0),
            ],
        })
        with pytest.raises(GeoJSONError, match="Point"):
            from_geojson(doc)

    def test_too_few_features(self):
        doc = json.dumps({"type": "FeatureCollection", "features": [square_feature(0, 0)]})
        with pytest.raises(GeoJSONError, match="at least 2"):
            from_geojson(doc)

    def test_quantization_absorbs_jitter(self):
        a = square_feature(0, 0)
        b = square_feature(1, 0)
        # nudge one shared vertex by much less than the quantum
        b["geometry"]["coordinates"][0][0][0] += 1e-12
        doc = json.dumps({"type": "FeatureCollection", "features": [a, b]})
        assert from_geojson(doc).neighbors == ((1,), (0,))


class TestConnectivity:
    def test_lattice_connected(self):
        assert is_connected(build_lattice_rook(3, 3))

    def test_two_disjoint_edges(self):
        w = from_adjacency_text("0: 1\n1: 0\n2: 3\n3: 2")
        assert not is_connected(w)

    def test_lattice_with_area_cut_out(self):
        original = build_lattice_rook(30, 30)
        lines = []
        victim = 435  # interior area; drop all its edges
        for i in range(original.n):
            if i == victim:
                lines.append(f"{i}:")
            else:
                nbrs = [j for j in original.neighbors[i] if j != victim]
                lines.append(f"{i}: " + " ".join(map(str, nbrs)))
        w = from_adjacency_text("\n".join(lines))
        assert not is_connected(w)
        assert bfs_component_size(w.neighbors) == w.n - 1


class TestInvariantsAndSerialization:
    @pytest.mark.parametrize("builder", [
        lambda: build_lattice_rook(4, 7),
        lambda: from_adjacency_text("0: 1\n1: 0 2\n2: 1"),
        lambda: from_geojson(square_grid_geojson(3, 4)),
    ])
    def test_standardized_rows_sum_to_one(self, builder):
        w = builder()
        for i, row in enumerate(w.weights):
            if row:
                assert abs(sum(row) - 1.0) <= 1e-12

    def test_json_round_trip(self):
        for w in (build_lattice_rook(5, 3), build_lattice_rook(2, 2, standardized=False)):
            assert SpatialWeights.from_json(w.to_json()) == w

    def test_no_self_neighbors_enforced(self):
        with pytest.raises(InvalidDimensionError, match="itself"):
            SpatialWeights(n=2, neighbors=((0,), (0,)), weights=((1.0,), (1.0,)))

    def test_symmetry_enforced(self):
        with pytest.raises(InvalidDimensionError, match="asymmetric"):
            SpatialWeights(n=3, neighbors=((1,), (), ()), weights=((1.0,), (), ()))

    def test_bad_row_sum_rejected(self):
        with pytest.raises(InvalidDimensionError, match="sums"):
            SpatialWeights(n=2, neighbors=((1,), (0,)), weights=((0.7,), (1.0,)))

    def test_neighbor_index_range(self):
        with pytest.raises(InvalidDimensionError, match="outside"):
            SpatialWeights(n=2, neighbors=((5,), ()), weights=((1.0,), ()))

    def test_sparse_matrix_row_stochastic(self):
        w = build_lattice_rook(6, 6)
        sums = np.asarray(w.sparse.sum(axis=1)).ravel()
        assert np.allclose(sums, 1.0, atol=1e-12)
