"""Labeled polyhedra: validation, vertices, structure groups, Delzant data.

A labeled polyhedron is a proper, rational, simple polyhedron with a positive
integer attached to each facet. The labels change the geometry: a label m on
a facet puts a Z/m cone angle along the corresponding divisor. This script
walks the discrete half of the pipeline on three examples.
"""

from toricshrink.polyhedra import (
    box,
    delzant_data,
    from_halfspaces,
    interval,
    normal_fan,
    structure_group,
    validate,
    vertices,
)

print("== teardrop interval [-2, 2/3] with labels (1, 3) ==")
teardrop = interval(-2, "2/3", 1, 3)
report = validate(teardrop)
print(f"proper={report.proper} rational={report.rational} simple={report.simple}")
for v in vertices(teardrop):
    g = structure_group(teardrop, v.active_facets)
    print(f"vertex x={v.point[0]}: structure group {g}")
# the label-3 end is the Z/3 cone point of the teardrop orbifold

data = delzant_data(teardrop)
print(f"delzant projection {data.projection}, kernel {data.kernel_basis}")

print()
print("== square [-2,2]^2, all labels 1 ==")
square = box([(-2, 2), (-2, 2)])
for v in vertices(square):
    g = structure_group(square, v.active_facets)
    print(f"vertex {v.point_float}: {g}")
print(f"normal fan has {len(normal_fan(square))} cones")

print()
print("== pentagon with a label-2 slant facet ==")
pentagon = from_halfspaces(
    2,
    [
        ((1, 0), 1, 2),
        ((0, 1), 1, 2),
        ((-1, 0), 1, 2),
        ((0, -1), 1, 2),
        ((-1, -1), 2, 2),
    ],
)
# the two vertices on the slant facet pick up Z/2 isotropy from its label
for v in vertices(pentagon):
    g = structure_group(pentagon, v.active_facets)
    print(f"vertex {v.point_float}: {g}")
