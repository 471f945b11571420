import numpy as np
import pytest

from wavekin.dispersion import DispersionLaw


@pytest.fixture
def law():
    return DispersionLaw()


class TestEnergy:
    def test_zero(self, law):
        assert law.energy(0.0) == 0.0

    def test_unit(self, law):
        assert law.energy(1.0) == 1.0

    def test_four(self, law):
        # 4^(3/2) by direct arithmetic
        assert law.energy(4.0) == pytest.approx(8.0, rel=1e-15)

    def test_sigma_scaling(self):
        law = DispersionLaw(sigma=4.0)
        assert law.energy(1.0) == pytest.approx(2.0, rel=1e-15)
        assert law.energy(4.0) == pytest.approx(16.0, rel=1e-15)

    def test_general_gamma(self):
        law = DispersionLaw(gamma=1.25)
        assert law.energy(2.0) == pytest.approx(2.0 ** 1.25, rel=1e-15)

    def test_negative_rejected(self, law):
        with pytest.raises(ValueError):
            law.energy(-1.0)

    def test_vectorized(self, law):
        k = np.array([0.0, 1.0, 4.0])
        np.testing.assert_allclose(law.energy(k), [0.0, 1.0, 8.0], rtol=1e-15)


class TestEnergyInverse:
    def test_trivial(self, law):
        assert law.energy_inverse(0.0) == 0.0
        assert law.energy_inverse(1.0) == pytest.approx(1.0, rel=1e-15)

    def test_eight(self, law):
        assert law.energy_inverse(8.0) == pytest.approx(4.0, rel=1e-14)

    def test_negative_rejected(self, law):
        with pytest.raises(ValueError):
            law.energy_inverse(-0.5)

    def test_round_trip(self, law):
        rng = np.random.default_rng(11)
        e = 10.0 ** rng.uniform(-6, 6, size=1000)
        back = law.energy(law.energy_inverse(e))
        np.testing.assert_allclose(back, e, rtol=1e-13)

    def test_round_trip_general(self):
        law = DispersionLaw(gamma=1.7, sigma=2.5)
        rng = np.random.default_rng(12)
        e = 10.0 ** rng.uniform(-6, 6, size=1000)
        np.testing.assert_allclose(law.energy(law.energy_inverse(e)), e, rtol=1e-13)


class TestPartners:
    def test_gain_boundary(self, law):
        assert law.partner_gain(1.0, 1.0) == 0.0

    def test_gain_equal_partner(self, law):
        # a^(3/2) = 2 makes the two partners both unit magnitude
        a = 2.0 ** (2.0 / 3.0)
        assert law.partner_gain(a, 1.0) == pytest.approx(1.0, rel=1e-14)

    def test_gain_two_one(self, law):
        expected = (2.0 ** 1.5 - 1.0) ** (2.0 / 3.0)
        b = law.partner_gain(2.0, 1.0)
        assert b == pytest.approx(expected, rel=1e-14)
        assert abs(law.energy(2.0) - law.energy(b) - law.energy(1.0)) <= 1e-14 * law.energy(2.0)

    def test_gain_rejects_large_partner(self, law):
        with pytest.raises(ValueError):
            law.partner_gain(1.0, 2.0)

    def test_loss_zero_partner(self, law):
        assert law.partner_loss(3.7, 0.0) == pytest.approx(3.7, rel=1e-15)

    def test_loss_equal(self, law):
        assert law.partner_loss(1.0, 1.0) == pytest.approx(2.0 ** (2.0 / 3.0), rel=1e-14)

    def test_loss_one_two(self, law):
        expected = (1.0 + 2.0 ** 1.5) ** (2.0 / 3.0)
        ap = law.partner_loss(1.0, 2.0)
        assert ap == pytest.approx(expected, rel=1e-14)
        assert abs(law.energy(ap) - law.energy(1.0) - law.energy(2.0)) <= 1e-13 * law.energy(ap)

    def test_loss_dominates(self, law):
        rng = np.random.default_rng(3)
        a = 10.0 ** rng.uniform(-3, 3, 200)
        c = 10.0 ** rng.uniform(-3, 3, 200)
        ap = law.partner_loss(a, c)
        assert np.all(ap >= np.maximum(a, c))

    def test_involution(self, law):
        rng = np.random.default_rng(4)
        a = 10.0 ** rng.uniform(-3, 3, 500)
        c = a * rng.uniform(0.02, 1.0, 500)
        b = law.partner_gain(a, c)
        c_back = law.partner_gain(a, b)
        np.testing.assert_allclose(c_back, c, rtol=1e-13)

    def test_involution_conditioning_limit(self, law):
        # recovering c from the rounded double b amplifies half an ulp by
        # (a/c)^gamma, so for extreme ratios only the scaled bound can hold
        rng = np.random.default_rng(44)
        a = 10.0 ** rng.uniform(-3, 3, 500)
        c = a * rng.uniform(1e-5, 1.0, 500)
        b = law.partner_gain(a, c)
        c_back = law.partner_gain(a, b)
        rel = np.abs(c_back - c) / c
        cond = (a / c) ** law.gamma
        assert np.all(rel <= 4.0 * np.finfo(float).eps * cond + 1e-15)


class TestSuperadditivity:
    @pytest.mark.parametrize("gamma", [1.2, 1.5, 2.0])
    def test_random_pairs(self, gamma):
        law = DispersionLaw(gamma=gamma)
        rng = np.random.default_rng(5)
        a = 10.0 ** rng.uniform(-3, 3, 1000)
        b = 10.0 ** rng.uniform(-3, 3, 1000)
        lhs = law.energy(a) + law.energy(b)
        rhs = law.energy(a + b)
        assert np.all(lhs <= rhs * (1 + 1e-14))


class TestDeficits:
    def test_gain_deficit_matches_direct(self, law):
        rng = np.random.default_rng(6)
        a = 10.0 ** rng.uniform(-2, 2, 300)
        c = a * rng.uniform(0.2, 0.999, 300)
        np.testing.assert_allclose(law.gain_deficit(a, c),
                                   a - law.partner_gain(a, c), rtol=1e-12)

    def test_gain_deficit_small_partner(self, law):
        # leading order (c/a)^gamma / gamma for c << a
        a, c = 1.0, 1e-7
        lead = a * (c / a) ** 1.5 / 1.5
        assert law.gain_deficit(a, c) == pytest.approx(lead, rel=1e-6)

    def test_loss_excess_matches_direct(self, law):
        rng = np.random.default_rng(7)
        a = 10.0 ** rng.uniform(-2, 2, 300)
        c = 10.0 ** rng.uniform(-2, 2, 300)
        np.testing.assert_allclose(law.loss_excess(a, c),
                                   law.partner_loss(a, c) - a,
                                   rtol=1e-10, atol=1e-300)

    def test_loss_excess_small_partner(self, law):
        a, c = 1.0, 1e-7
        lead = a * (c / a) ** 1.5 / 1.5
        assert law.loss_excess(a, c) == pytest.approx(lead, rel=1e-6)


class TestValidation:
    def test_gamma_range(self):
        with pytest.raises(ValueError):
            DispersionLaw(gamma=1.0)
        with pytest.raises(ValueError):
            DispersionLaw(gamma=2.5)

    def test_sigma_positive(self):
        with pytest.raises(ValueError):
            DispersionLaw(sigma=0.0)

    def test_dim(self):
        with pytest.raises(ValueError):
            DispersionLaw(dim=4)
