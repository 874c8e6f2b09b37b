"""Doubling corner regions into smooth algebraic models.

The package turns a region cut out by polynomial inequalities into an
explicit smooth variety carrying one mirrored sheet per sign pattern,
provides the exact smoothing kernels that make the folded sheets meet
smoothly, and specializes to convex polygons where the doubled surfaces
have computable cell counts and genus.
"""

from nashforge.doubling import (
    ChartSpec,
    DoubledVariety,
    SheetPoint,
    SmoothReport,
    build_double,
    chart_roundtrip,
    facet_chart,
    polygon_double,
    verify_smooth,
)
from nashforge.mesh import (
    GlueKey,
    TriangleMesh,
    build_surface_mesh,
    export_mesh,
    mesh_euler,
    triangulate_polygon,
)
from nashforge.poly import MultiPoly, SqrtElem, UniPoly, divisibility_check, sqrt_mul
from nashforge.region import (
    ConvexPolygon,
    CornerRegion,
    EdgePartition,
    InvalidPartitionError,
    LinearForm,
    enumerate_valid_partitions,
    regular_polygon,
    validate_partition,
)
from nashforge.smoothing import (
    FoldMap1D,
    FoldMap2D,
    MostowskiMap,
    SmoothingKernel,
    collar_eval,
    fold1d,
    fold2d,
    kernel_eval,
    mostowski_embed,
)
from nashforge.topology import (
    CWCounts,
    GenusTable,
    cw_counts,
    euler_char,
    genus,
    genus_table,
    glue_complex,
)

__version__ = "0.1.0"

__all__ = [
    "CWCounts",
    "ChartSpec",
    "ConvexPolygon",
    "CornerRegion",
    "DoubledVariety",
    "EdgePartition",
    "FoldMap1D",
    "FoldMap2D",
    "GenusTable",
    "GlueKey",
    "InvalidPartitionError",
    "LinearForm",
    "MostowskiMap",
    "MultiPoly",
    "SheetPoint",
    "SmoothReport",
    "SmoothingKernel",
    "SqrtElem",
    "TriangleMesh",
    "UniPoly",
    "build_double",
    "build_surface_mesh",
    "chart_roundtrip",
    "collar_eval",
    "cw_counts",
    "divisibility_check",
    "enumerate_valid_partitions",
    "euler_char",
    "export_mesh",
    "facet_chart",
    "fold1d",
    "fold2d",
    "genus",
    "genus_table",
    "glue_complex",
    "kernel_eval",
    "mesh_euler",
    "mostowski_embed",
    "polygon_double",
    "regular_polygon",
    "sqrt_mul",
    "triangulate_polygon",
    "validate_partition",
    "verify_smooth",
    "__version__",
]
