"""Unit tests for the catalogue of Weyl chart structures."""

import numpy as np
import pytest

from miniweyl import structures, weyl
from miniweyl.errors import DescriptorError


def test_build_known_structure() -> None:
    """Names in the catalogue build structures carrying that name."""
    assert structures.build_structure("desitter").name == "desitter"
    assert structures.build_structure("flat_patch", {"alpha_t": 0.5}).name == "flat_patch"


def test_unknown_structure_lists_choices() -> None:
    """An unknown name reports the catalogue."""
    with pytest.raises(DescriptorError, match="static_cylinder"):
        structures.build_structure("anti_desitter")


def test_bad_parameters() -> None:
    """Parameters the factory does not accept are a descriptor error."""
    with pytest.raises(DescriptorError, match="bad parameters"):
        structures.build_structure("static_cylinder", {"radius": 2.0})


def test_flat_patch_is_flat() -> None:
    """Minkowski space with alpha_hat = 0 has vanishing curvature."""
    ricci = weyl.curvature_ricci(structures.flat_patch(), np.array([0.1, 0.4, -0.3]))
    np.testing.assert_allclose(ricci, 0.0, atol=1e-8)


def test_scale_alpha_only_touches_alpha() -> None:
    """The scaled structure keeps the metric and multiplies alpha_hat."""
    base = structures.build_structure("desitter")
    scaled = structures.scale_alpha(base, 2.0)
    x = np.array([0.3, 0.2, 0.1])
    np.testing.assert_allclose(scaled.g_hat(x, 0), base.g_hat(x, 0))
    np.testing.assert_allclose(scaled.alpha_hat(x, 0), 2.0 * base.alpha_hat(x, 0))


def test_conformal_rescale_moves_u() -> None:
    """The defining function picks up the factor e^phi."""
    base = structures.build_structure("desitter")
    rescaled = structures.conformal_rescale(base, lambda x, _chart: np.full(np.shape(x)[:-1], 0.5))
    x = np.array([0.3, 0.2, 0.1])
    assert rescaled.u(x, 0) == pytest.approx(np.exp(0.5) * base.u(x, 0))
    np.testing.assert_allclose(rescaled.alpha_hat(x, 0), base.alpha_hat(x, 0), atol=1e-10)
