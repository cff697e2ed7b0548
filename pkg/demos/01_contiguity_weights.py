"""Build contiguity weights three ways: lattice, adjacency text, GeoJSON.

Rook contiguity means two areas are neighbors iff they share a boundary
edge. All constructors produce the same immutable SpatialWeights object,
row-standardized so each area's neighbor weights sum to one.
"""

import json

from smaup import (
    build_lattice_rook,
    from_adjacency_text,
    from_geojson,
    is_connected,
    to_adjacency_text,
)

# A 5x5 grid, the workhorse of the simulation experiments.
w = build_lattice_rook(5, 5)
print(f"5x5 rook lattice: n={w.n}, undirected edges={w.edge_count}, "
      f"connected={is_connected(w)}")
print(f"corner area 0 -> neighbors {w.neighbors[0]} weights {w.weights[0]}")
print(f"center area 12 -> neighbors {w.neighbors[12]} weights {w.weights[12]}")

# The same structure survives a round trip through the adjacency text format.
dumped = to_adjacency_text(w)
print("\nadjacency text, first three lines:")
print("\n".join(dumped.splitlines()[:3]))
assert from_adjacency_text(dumped) == w

# Polygon inputs: shared full edges count, shared corners do not.
squares = []
for row in range(2):
    for col in range(2):
        squares.append({
            "type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": [[
                [col, row], [col + 1, row], [col + 1, row + 1], [col, row + 1], [col, row],
            ]]},
        })
block = from_geojson(json.dumps({"type": "FeatureCollection", "features": squares}))
print("\n2x2 block of unit squares (rook rule):")
for i, nbrs in enumerate(block.neighbors):
    print(f"  square {i}: neighbors {nbrs}  (diagonal excluded)")

# Everything serializes to a compact JSON document.
print("\nweights JSON head:", block.to_json()[:80], "...")
