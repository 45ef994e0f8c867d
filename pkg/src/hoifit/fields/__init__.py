"""Field oracles: the query abstraction over scene distance, part, and pose
fields, with mesh-exact and grid-interpolated providers."""

from .diagnostic import FieldDiagnostic, field_diagnostic
from .grid import GridFieldOracle, grid_oracle, save_field_grid
from .mesh_oracle import MeshFieldOracle, mesh_oracle
from .projection import ProjectionResult, surface_projection
from .sample import FieldOracle, FieldSample, FieldSampleBatch, NoiseSpec

__all__ = [
    "FieldDiagnostic",
    "FieldOracle",
    "FieldSample",
    "FieldSampleBatch",
    "GridFieldOracle",
    "MeshFieldOracle",
    "NoiseSpec",
    "ProjectionResult",
    "field_diagnostic",
    "grid_oracle",
    "mesh_oracle",
    "save_field_grid",
    "surface_projection",
]
