import numpy as np
import pytest

from anisoeq import seeds, verify
from anisoeq.errors import UnsupportedMetadataError
from anisoeq.fields import curl, div, grad
from anisoeq.freefunc import FreeFunction
from anisoeq.sampling import SampleSet
from anisoeq.states import StaticIsotropicState

PTS = SampleSet(count=2000).points()


class TestVacuum:
    def test_power_two(self):
        s = seeds.make_vacuum_planar_harmonic("power", n=2, Bz0=0.0)
        p = np.array([[0.3, -0.7, 0.2]])
        np.testing.assert_allclose(s.B(p), [[0.6, 1.4, 0.0]])
        np.testing.assert_allclose(s.p_label(p), [2 * 0.3 * -0.7])
        assert np.max(np.abs(np.einsum("ni,ni->n", s.B(PTS), grad(s.p_label, PTS)))) <= 1e-14

    def test_exp_trig(self):
        s = seeds.make_vacuum_planar_harmonic("exp-trig", Bz0=1.0)
        x, y = PTS[:, 0], PTS[:, 1]
        expected = np.stack([np.exp(x) * np.cos(y), -np.exp(x) * np.sin(y), np.ones_like(x)], 1)
        np.testing.assert_allclose(s.B(PTS), expected, rtol=1e-14)
        np.testing.assert_allclose(s.p_label(PTS), np.exp(x) * np.sin(y), rtol=1e-14)
        assert np.max(np.abs(curl(s.B, PTS))) <= 1e-12
        assert np.max(np.abs(div(s.B, PTS))) <= 1e-12

    @pytest.mark.parametrize("kind,n", [("power", 1), ("power", 3), ("exp-trig", 2)])
    def test_residuals(self, kind, n):
        s = seeds.make_vacuum_planar_harmonic(kind, n=n, Bz0=0.5)
        assert verify.residual_vacuum(s, PTS, mode="analytic").linf <= 1e-12
        assert verify.residual_vacuum(s, PTS).linf <= 1e-5

    def test_bad_kind(self):
        with pytest.raises(ValueError):
            seeds.make_vacuum_planar_harmonic("log")
        with pytest.raises(ValueError):
            seeds.make_vacuum_planar_harmonic("power", n=0)


class TestHelical:
    def test_origin(self):
        s = seeds.make_force_free_helical(1.0, 2.0)
        np.testing.assert_allclose(s.B([0, 0, 0]), [0, 1, 0])
        np.testing.assert_allclose(curl(s.B, [0, 0, 0]), [0, 2, 0])

    def test_constant_magnitude(self):
        s = seeds.make_force_free_helical(1.7, 3.0)
        np.testing.assert_allclose(s.B.norm2()(PTS), 1.7**2, rtol=1e-14)

    def test_residual(self):
        s = seeds.make_force_free_helical(1.0, 2.0)
        assert verify.residual_force_free(s, PTS, mode="analytic").linf <= 1e-12
        assert verify.residual_force_free(s, PTS).linf <= 1e-5


class TestAbc:
    def test_reduces_to_helical(self):
        s = seeds.make_abc_beltrami(1.0, 0.0, 0.0)
        # (sin z, cos z, 0) is the helical field with B0 = alpha = 1
        np.testing.assert_allclose(s.B(PTS), seeds._helical_field(1.0, 1.0)(PTS), atol=1e-15)
        np.testing.assert_allclose(curl(s.B, PTS), s.B(PTS), atol=1e-14)

    def test_origin_value(self):
        # direct substitution at the origin gives (0+1, 0+1, 0+1)
        s = seeds.make_abc_beltrami(1.0, 1.0, 1.0)
        np.testing.assert_allclose(s.B([0, 0, 0]), [1, 1, 1])
        np.testing.assert_allclose(curl(s.B, [0, 0, 0]), [1, 1, 1])

    def test_residual(self):
        s = seeds.make_abc_beltrami(1.0, 0.7, 0.3)
        assert np.max(np.abs(div(s.B, PTS))) <= 1e-12
        assert np.max(np.abs(curl(s.B, PTS) - s.B(PTS))) <= 1e-12
        assert verify.residual_force_free(s, PTS).linf <= 1e-5

    def test_no_surface(self):
        s = seeds.make_abc_beltrami()
        with pytest.raises(UnsupportedMetadataError):
            s.surface()
        with pytest.raises(UnsupportedMetadataError):
            seeds.embed_as_anisotropic(s)


class TestThetaPinch:
    def test_uniform_field(self):
        s = seeds.make_theta_pinch(FreeFunction.constant(2.0), p0=3.0)
        np.testing.assert_allclose(s.p(PTS), 1.0)
        assert verify.residual_plasma(s, PTS, mode="analytic").linf == 0.0

    def test_gaussian(self):
        s = seeds.make_theta_pinch()
        r2 = PTS[:, 0] ** 2 + PTS[:, 1] ** 2
        np.testing.assert_allclose(s.p(PTS), 1.0 - 0.5 * np.exp(-r2), rtol=1e-14)
        assert verify.residual_plasma(s, PTS, mode="analytic").linf <= 1e-12
        assert verify.residual_plasma(s, PTS).linf <= 1e-5

    def test_surface_exact(self):
        s = seeds.make_theta_pinch()
        assert verify.check_surface(s, PTS, mode="analytic").linf == 0.0


class TestFieldAlignedFlow:
    def test_zero_flow_is_static(self):
        s = seeds.make_field_aligned_flow(lam=FreeFunction.constant(0.0))
        np.testing.assert_array_equal(s.V(PTS), 0.0)
        assert verify.residual_mhd(s, PTS, mode="analytic").linf == 0.0

    def test_linear_flow(self):
        s = seeds.make_field_aligned_flow(1.0, 1.0, FreeFunction.identity(), 1.0, 1.0)
        p = [0.0, 0.0, 0.5]
        np.testing.assert_allclose(s.V(p), 0.5 * s.B(p))
        assert verify.residual_mhd(s, PTS, mode="analytic").linf <= 1e-12
        assert verify.residual_mhd(s, PTS).linf <= 1e-5

    def test_bernoulli_gradient(self):
        s = seeds.make_field_aligned_flow(1.0, 1.0, FreeFunction.identity(), 1.0, 1.0)
        bern = s.P + 0.5 * s.rho * s.V.norm2()
        g = grad(bern, PTS)
        z = PTS[:, 2]
        np.testing.assert_allclose(g[:, 2], z, atol=1e-14)
        np.testing.assert_allclose(g[:, :2], 0.0, atol=1e-14)
        np.testing.assert_allclose(bern(PTS), s.M(z), rtol=1e-14)


class TestEmbed:
    def test_theta_pinch(self):
        a = seeds.embed_as_anisotropic(seeds.make_theta_pinch())
        assert verify.residual_amhd(a, PTS, mode="analytic").linf <= 1e-12
        f = a.fields()
        np.testing.assert_array_equal(f["tau"](PTS), 0.0)
        np.testing.assert_array_equal(f["p_par"](PTS), f["p_perp"](PTS))

    def test_helical_with_density(self):
        a = seeds.embed_as_anisotropic(
            seeds.make_force_free_helical(1.0, 2.0), FreeFunction.polynomial([1.0, 0.0, 1.0])
        )
        np.testing.assert_allclose(a.rho(PTS), 1 + PTS[:, 2] ** 2)
        assert verify.residual_amhd(a, PTS).linf <= 1e-5
        assert verify.check_surface(a, PTS).linf <= 1e-10
        assert verify.check_parallel_gradients(a.rho, a.surface(), PTS).linf <= 1e-12


@pytest.mark.parametrize("name", sorted(seeds.SEEDS))
def test_catalog_builds_and_verifies(name):
    st = seeds.build_seed(name)
    assert verify.verify_state(st, PTS, mode="analytic").linf <= 1e-7
    assert verify.verify_state(st, PTS).linf <= 1e-5
    if verify.surface_label(st) is not None:
        assert verify.check_surface(st, PTS, mode="analytic", psi=verify.surface_label(st)).linf <= 1e-10


def test_catalog_entries():
    assert "static rescale with constant f only" in seeds.SEEDS["abc_beltrami"].note
    with pytest.raises(KeyError):
        seeds.build_seed("tokamak")
    assert isinstance(seeds.build_seed("force_free_helical", alpha=3.0), StaticIsotropicState)
