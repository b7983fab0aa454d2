"""Factory functions for creating test model objects.

Random objects take a numpy Generator so every test fixes its own seed.
"""

import numpy as np

from miniweyl import diffeo, welding
from miniweyl.models import (
    Antipodal,
    CenterPoint,
    DiskParam,
    FlowPerturbed,
    HolomorphicDisk,
    MobiusConjugated,
    MobiusMap,
    SpherePoint,
)


def make_point(w: complex) -> SpherePoint:
    """SpherePoint with affine coordinate w."""
    return SpherePoint.from_affine(w)


def random_matrix(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """2x2 complex matrix with unit-Gaussian entries times `scale`."""
    return scale * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))


def random_param(rng: np.random.Generator) -> DiskParam:
    """Random de Sitter disk parameter, normalized to SL(2,C)."""
    return DiskParam(MobiusMap.from_matrix(random_matrix(rng)).matrix)


def near_identity_mobius(rng: np.random.Generator, size: float = 0.2) -> MobiusMap:
    """Möbius map within `size` of the identity, so images stay well inside charts."""
    return MobiusMap.from_matrix(np.eye(2) + random_matrix(rng, size))


def make_conjugated(rng: np.random.Generator, size: float = 0.2) -> MobiusConjugated:
    """Antipodal map conjugated by two random near-identity Möbius maps."""
    return MobiusConjugated(near_identity_mobius(rng, size), near_identity_mobius(rng, size), Antipodal())


def make_perturbed(eps: float = 0.05) -> FlowPerturbed:
    """The canonical flow perturbation of the antipodal map."""
    return diffeo.flow_perturbed_antipodal(eps)


def make_center(z: complex = 0.0, w: complex = 0.0, radius: float = 1.0) -> CenterPoint:
    """CenterPoint selector from affine coordinates."""
    return CenterPoint(make_point(z), make_point(w), radius)


def identity_disk(degree: int = 32) -> HolomorphicDisk:
    """The disk (zeta, -zeta) for the antipodal map."""
    return welding.desitter_seed(DiskParam(np.eye(2, dtype=np.complex128)), degree)


def noisy_disk(disk: HolomorphicDisk, size: float, rng: np.random.Generator) -> HolomorphicDisk:
    """Add complex Gaussian noise of the given size to the low F1 coefficients of a disk."""
    noise = np.zeros_like(disk.f1)
    noise[:4] = size * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
    return welding.disk_from_f1(Antipodal(), disk.f1 + noise, disk.chart1, disk.chart2)
