"""Discrete Dirichlet-to-Neumann operator and Steklov spectra.

The stiffness matrix is partitioned into interior/boundary blocks, the
interior block is eliminated by a sparse factorization, and the resulting
dense boundary operator is solved as a generalized symmetric eigenproblem
against the boundary mass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import splu

from .errors import (
    EigensolverNoConvergence,
    InvalidSpectrumList,
    SingularInteriorBlock,
    ValidationError,
)
from .fem import FemMatrices, assemble
from .mesh import TriangleMesh, volumes

_SOLVE_CHUNK = 256  # columns per interior solve, caps dense workspace


@dataclass
class SpectralResult:
    """Steklov eigenvalues (ascending, sigma_0 ~ 0 included) of one mesh.

    eigenvectors holds boundary traces column-wise, orthonormal in the
    boundary mass inner product.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    vol: float
    boundary_vol: float
    h: float
    nv: int
    nb: int
    ni: int

    def validate(self):
        sig = self.eigenvalues
        if np.any(np.diff(sig) < 0):
            raise EigensolverNoConvergence("eigenvalues not ascending")
        if sig[0] < -1e-8 * (abs(sig[-1]) + 1.0):
            raise EigensolverNoConvergence("negative zero mode beyond tolerance")


def interior_boundary_split(matrices: FemMatrices):
    """Index arrays (interior, boundary) partitioning the dofs."""
    n = matrices.n
    boundary = matrices.boundary_index
    mask = np.ones(n, dtype=bool)
    mask[boundary] = False
    return np.nonzero(mask)[0], boundary


def dtn_matrix(matrices: FemMatrices) -> np.ndarray:
    """Schur complement S = A_bb - A_bi A_ii^{-1} A_ib of the stiffness onto
    the boundary dofs; the discrete Dirichlet-to-Neumann map."""
    interior, boundary = interior_boundary_split(matrices)
    a = matrices.stiffness.tocsc()
    a_bb = a[np.ix_(boundary, boundary)].toarray()
    if interior.size == 0:
        return a_bb
    a_ii = a[np.ix_(interior, interior)].tocsc()
    a_ib = a[np.ix_(interior, boundary)].tocsc()
    try:
        lu = splu(a_ii)
    except RuntimeError as exc:
        raise SingularInteriorBlock(str(exc)) from exc
    s = a_bb
    for start in range(0, boundary.size, _SOLVE_CHUNK):
        cols = slice(start, min(start + _SOLVE_CHUNK, boundary.size))
        x = lu.solve(a_ib[:, cols].toarray())
        s[:, cols] -= a_ib.T @ x
    return 0.5 * (s + s.T)


def harmonic_extension(matrices: FemMatrices, boundary_values: np.ndarray) -> np.ndarray:
    """Full coefficient vector of the discrete harmonic function with the
    given boundary trace."""
    interior, boundary = interior_boundary_split(matrices)
    u = np.zeros(matrices.n)
    u[boundary] = boundary_values
    if interior.size:
        a = matrices.stiffness.tocsc()
        a_ii = a[np.ix_(interior, interior)].tocsc()
        a_ib = a[np.ix_(interior, boundary)]
        u[interior] = -splu(a_ii).solve(a_ib @ boundary_values)
    return u


def steklov_spectrum(mesh: TriangleMesh, num: int) -> SpectralResult:
    """Solve the discrete Steklov eigenproblem, returning the num+1 smallest
    eigenpairs (the near-zero mode first)."""
    matrices = assemble(mesh)
    _, boundary = interior_boundary_split(matrices)
    if num > boundary.size - 1:
        raise ValidationError(f"num={num} exceeds boundary dof count {boundary.size}")
    s = dtn_matrix(matrices)
    b_bb = matrices.boundary_mass.tocsc()[np.ix_(boundary, boundary)].toarray()
    try:
        sig, vec = scipy.linalg.eigh(s, b_bb, subset_by_index=(0, num))
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverNoConvergence(str(exc)) from exc
    vol, bvol = volumes(mesh)
    result = SpectralResult(
        eigenvalues=sig,
        eigenvectors=vec,
        vol=vol,
        boundary_vol=bvol,
        h=mesh.h,
        nv=mesh.nv,
        nb=int(boundary.size),
        ni=int(mesh.nv - boundary.size),
    )
    result.validate()
    return result


def spectral_result_payload(shape, result: SpectralResult, m: int = 2) -> dict:
    """JSON-ready record with trace diagnostics over the first m positive
    eigenvalues."""
    sig = result.eigenvalues
    ratio = result.boundary_vol / result.vol
    trace_sum = float(np.sum(sig[1:m + 1])) if len(sig) > m else None
    return {
        "shape": shape.describe(),
        "h": result.h,
        "nv": result.nv,
        "nb": result.nb,
        "eigenvalues": [float(s) for s in sig],
        "vol": result.vol,
        "bvol": result.boundary_vol,
        "trace_sum_m": trace_sum,
        "ratio": ratio,
        "deficit": (ratio - trace_sum) if trace_sum is not None else None,
    }


# ---------------------------------------------------------------------------
# closed-form Laplace spectra of the fiber factor
# ---------------------------------------------------------------------------

def circle_spectrum(length: float, count: int):
    """Laplace eigenvalues of a circle of radius length: 0, then (k/L)^2
    twice each. Returned as (value, multiplicity) pairs, ascending."""
    if not length > 0:
        raise InvalidSpectrumList("circle radius must be positive")
    out = [(0.0, 1)]
    k = 1
    while sum(m for _, m in out) < count:
        out.append(((k / length) ** 2, 2))
        k += 1
    return out


def flat_torus_spectrum(l1: float, l2: float, count: int):
    """Laplace eigenvalues of a flat torus: sums of two circle spectra."""
    if not (l1 > 0 and l2 > 0):
        raise InvalidSpectrumList("torus radii must be positive")
    kmax = 1
    while True:
        vals = {}
        for j in range(-kmax, kmax + 1):
            for k in range(-kmax, kmax + 1):
                mu = (j / l1) ** 2 + (k / l2) ** 2
                vals[round(mu, 12)] = vals.get(round(mu, 12), 0) + 1
        cut = (kmax / max(l1, l2)) ** 2  # complete below this threshold
        pairs = [(mu, m) for mu, m in sorted(vals.items()) if mu <= cut]
        if sum(m for _, m in pairs) >= count:
            return _truncate(pairs, count)
        kmax *= 2


def user_spectrum(values):
    """Validate and compress an explicit ascending eigenvalue list."""
    vals = [float(v) for v in values]
    if not vals or vals[0] != 0.0:
        raise InvalidSpectrumList("spectrum must start at 0")
    if any(v < 0 for v in vals):
        raise InvalidSpectrumList("negative eigenvalue")
    if any(b < a for a, b in zip(vals, vals[1:])):
        raise InvalidSpectrumList("eigenvalues not ascending")
    pairs = []
    for v in vals:
        if pairs and _close(pairs[-1][0], v):
            pairs[-1] = (pairs[-1][0], pairs[-1][1] + 1)
        else:
            pairs.append((v, 1))
    return pairs


def laplace_closed_factor_spectrum(kind: str, count: int = 64, **params):
    """Dispatch on fiber kind: 'circle' (L), 'flat-torus' (L1, L2),
    'user-list' (values)."""
    if kind == "circle":
        return circle_spectrum(params["L"], count)
    if kind == "flat-torus":
        return flat_torus_spectrum(params["L1"], params["L2"], count)
    if kind == "user-list":
        return user_spectrum(params["values"])
    raise InvalidSpectrumList(f"unknown factor kind {kind!r}")


def _truncate(pairs, count):
    out = []
    total = 0
    for v, m in pairs:
        if total >= count:
            break
        out.append((v, m))
        total += m
    return out


def _close(a, b, rel=1e-12):
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300)
