"""Heuristic Möbius-gauge distance between two sphere diffeomorphisms.

psi_1 and psi_2 are equivalent when psi_2 = post o psi_1 o pre for Möbius maps
pre and post. Fixing three anchor points a removes the gauge: with T_a the
Möbius map sending a to (0, 1, inf),

    gauged(psi, a) = T_{psi(a)} o psi o T_a^{-1}

fixes 0, 1 and inf, and equivalent maps have equal gauged forms for a suitable
choice of anchors b for psi_2. The distance searches b over a seed grid,
refines the best seeds by nonlinear least squares and reports the largest
chordal distance between the gauged maps on a sample grid. It is an upper
bound on the orbit distance, not a certified value.
"""

import itertools
import logging

import numpy as np
from scipy.optimize import least_squares

from . import diffeo, sphere
from .diffeo import DiffeoChain, MobiusStep
from .errors import DegenerateAnchors
from .models import ComplexArray, RealArray, SphereDiffeo, SpherePoint

logger = logging.getLogger(__name__)

ANCHOR_SEPARATION = 1e-3  # smallest pairwise chordal distance of an anchor triple
DEFAULT_ANCHORS = (SpherePoint(0.0, 1.0), SpherePoint(1.0, 1.0), SpherePoint(1.0, 0.0))
REFINE_SAMPLES = 96
REPORT_SAMPLES = 400
REFINED_SEEDS = 4
RANDOM_SEEDS = 24


def fibonacci_points(n: int) -> tuple[ComplexArray, ComplexArray]:
    """n nearly uniform points on the sphere (golden-angle spiral)."""
    k = np.arange(n) + 0.5
    theta = np.arccos(1.0 - 2.0 * k / n)
    phi = np.pi * (1.0 + np.sqrt(5.0)) * k
    return sphere.from_spherical_angles(theta, phi)


def _det(p: RealArray | ComplexArray, q: RealArray | ComplexArray) -> complex:
    return complex(p[0] * q[1] - p[1] * q[0])


def normalizing_matrix(anchors: ComplexArray) -> ComplexArray:
    """Matrix of the Möbius map sending the rows of `anchors` (shape (3, 2)) to 0, 1, inf.

    Raises:
        DegenerateAnchors: If two anchors (nearly) coincide.
    """
    separations = [
        float(sphere.chordal_distance_arrays(*anchors[i], *anchors[j]))
        for i, j in itertools.combinations(range(3), 2)
    ]
    if min(separations) < ANCHOR_SEPARATION:
        msg = f"anchor triple is degenerate: minimum separation {min(separations):.2e}"
        raise DegenerateAnchors(msg)
    p1, p2, p3 = anchors
    d23 = _det(p2, p3)
    d21 = _det(p2, p1)
    # T(p) = [det(p, p1) det(p2, p3) : det(p, p3) det(p2, p1)]
    return np.array([[p1[1] * d23, -p1[0] * d23], [p3[1] * d21, -p3[0] * d21]], dtype=np.complex128)


def _anchor_array(points: tuple[SpherePoint, ...]) -> ComplexArray:
    return np.array([[p.z0, p.z1] for p in points], dtype=np.complex128)


def gauged_chain(psi: SphereDiffeo | DiffeoChain, anchors: ComplexArray) -> DiffeoChain:
    """T_{psi(a)} o psi o T_a^{-1} as a step chain."""
    chain = diffeo.compile_diffeo(psi)
    images = np.stack(diffeo.apply_arrays(chain, anchors[:, 0], anchors[:, 1]), axis=-1)
    inner = np.linalg.inv(normalizing_matrix(anchors))
    outer = normalizing_matrix(images)
    return DiffeoChain((MobiusStep(inner), *chain.steps, MobiusStep(outer)))


def _embedded(chain: DiffeoChain, z0: ComplexArray, z1: ComplexArray) -> RealArray:
    return sphere.to_unit_vectors(*diffeo.apply_arrays(chain, z0, z1))


def _anchors_from_vector(vector: RealArray) -> ComplexArray:
    z0, z1 = sphere.from_unit_vectors(vector.reshape(3, 3))
    return np.stack([z0, z1], axis=-1)


def _seed_triples(anchors: ComplexArray, rng: np.random.Generator) -> list[ComplexArray]:
    seeds = [anchors]
    octahedron = np.array(
        [[0, 0, 1], [0, 0, -1], [1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]], dtype=np.float64
    )
    for i, j, k in itertools.permutations(range(6), 3):
        if np.dot(octahedron[i], octahedron[j]) < 0 or np.dot(octahedron[j], octahedron[k]) < 0:
            continue
        seeds.append(_anchors_from_vector(octahedron[[i, j, k]].ravel()))
    for _ in range(RANDOM_SEEDS):
        seeds.append(_anchors_from_vector(rng.standard_normal(9)))
    return seeds


def diffeo_gauge_distance(
    psi_1: SphereDiffeo | DiffeoChain,
    psi_2: SphereDiffeo | DiffeoChain,
    anchors: tuple[SpherePoint, SpherePoint, SpherePoint] = DEFAULT_ANCHORS,
    seed: int = 0,
) -> float:
    """Upper bound on the Möbius-orbit sup distance between psi_1 and psi_2.

    Args:
        psi_1: Reference map; gauged once at `anchors`.
        psi_2: Compared map; its anchors are optimized.
        anchors: Anchor triple for psi_1.
        seed: Seed for the random part of the anchor search.

    Raises:
        DegenerateAnchors: If `anchors` has nearly coincident points.
    """
    a = _anchor_array(anchors)
    reference = gauged_chain(psi_1, a)
    s0, s1 = fibonacci_points(REFINE_SAMPLES)
    target = _embedded(reference, s0, s1)

    def residual(vector: RealArray) -> RealArray:
        try:
            candidate = gauged_chain(psi_2, _anchors_from_vector(vector))
        except DegenerateAnchors:
            return np.full(target.size, 2.0)
        return (_embedded(candidate, s0, s1) - target).ravel()

    rng = np.random.default_rng(seed)
    scored: list[tuple[float, RealArray]] = []
    for triple in _seed_triples(a, rng):
        vector = sphere.to_unit_vectors(triple[:, 0], triple[:, 1]).ravel()
        scored.append((float(np.sum(residual(vector) ** 2)), vector))
    scored.sort(key=lambda item: item[0])

    best_cost, best = scored[0]
    if best_cost > 1e-24:
        for _, start in scored[:REFINED_SEEDS]:
            fit = least_squares(residual, start, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
            cost = float(np.sum(fit.fun**2))
            if cost < best_cost:
                best_cost, best = cost, fit.x
    logger.debug("gauge search settled at least-squares cost %.3e", best_cost)

    r0, r1 = fibonacci_points(REPORT_SAMPLES)
    lhs0, lhs1 = diffeo.apply_arrays(reference, r0, r1)
    rhs0, rhs1 = diffeo.apply_arrays(gauged_chain(psi_2, _anchors_from_vector(best)), r0, r1)
    return float(np.max(sphere.chordal_distance_arrays(lhs0, lhs1, rhs0, rhs1)))


def _perturbed_mobius(vector: RealArray) -> ComplexArray:
    return np.eye(2, dtype=np.complex128) + (vector[:4] + 1j * vector[4:]).reshape(2, 2)


def sampled_gauge_distance(
    psi: SphereDiffeo | DiffeoChain,
    sources: tuple[SpherePoint, ...],
    images: tuple[SpherePoint, ...],
) -> float:
    """Upper bound on the Möbius-orbit distance between psi and a map known only on samples.

    The sampled map sends sources[k] to images[k]. Pre- and post-composing
    psi with Möbius maps near the identity is fitted by least squares to the
    samples, and the largest chordal distance between post o psi o pre and
    the samples is reported. The identity gauge is always a candidate, so the
    result never exceeds the plain sup distance on the samples.

    Raises:
        ValueError: If sources and images differ in length or are empty.
    """
    if not sources or len(sources) != len(images):
        msg = f"need matching non-empty samples, got {len(sources)} sources and {len(images)} images"
        raise ValueError(msg)
    chain = diffeo.compile_diffeo(psi)
    s0, s1 = sphere.point_arrays(sources)
    t0, t1 = sphere.point_arrays(images)
    target = sphere.to_unit_vectors(t0, t1)

    def gauged(vector: RealArray) -> tuple[ComplexArray, ComplexArray]:
        pre0, pre1 = sphere.mobius_apply_arrays(_perturbed_mobius(vector[:8]), s0, s1)
        mid0, mid1 = diffeo.apply_arrays(chain, pre0, pre1)
        return sphere.mobius_apply_arrays(_perturbed_mobius(vector[8:]), mid0, mid1)

    def residual(vector: RealArray) -> RealArray:
        return (sphere.to_unit_vectors(*gauged(vector)) - target).ravel()

    def sup(vector: RealArray) -> float:
        return float(np.max(sphere.chordal_distance_arrays(*gauged(vector), t0, t1)))

    identity = np.zeros(16)
    best = sup(identity)
    fit = least_squares(residual, identity, xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=200)
    refined = sup(fit.x)
    logger.debug("sampled gauge distance: identity %.3e, fitted %.3e", best, refined)
    return min(best, refined)
