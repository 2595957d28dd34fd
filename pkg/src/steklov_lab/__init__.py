"""Steklov spectra of planar domains and ball-fiber products, with a
parallel-transport / holonomy ODE lab."""

from .mesh import (
    Annulus,
    Disk,
    Ellipse,
    PerturbedDisk,
    Polygon,
    Rectangle,
    TriangleMesh,
    build_mesh,
    read_tmesh,
    refine,
    volumes,
    write_tmesh,
)

__all__ = [
    "Annulus",
    "Disk",
    "Ellipse",
    "PerturbedDisk",
    "Polygon",
    "Rectangle",
    "TriangleMesh",
    "build_mesh",
    "read_tmesh",
    "refine",
    "volumes",
    "write_tmesh",
]

__version__ = "0.1.0"
