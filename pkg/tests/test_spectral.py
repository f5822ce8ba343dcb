import numpy as np
import pytest

from cmsim.dephasing import dephasing_factor_continuous, dephasing_rate
from cmsim.lossy_cavity import analytic_excited_amplitude
from cmsim.spectral import (
    DephasingSeries,
    LorentzianSum,
    dephasing_rate_from_sd,
    eval_sd,
    map_lorentzian_to_cm,
    memory_kernel,
    memory_kernel_quadrature,
    sd_from_dephasing_rate,
    solve_volterra,
)


class TestLorentzianSum:
    def test_peak_values(self):
        sd = LorentzianSum(((2.0, 1.0, 0.3), (0.5, -2.0, 1.0)))
        assert abs(eval_sd(sd, 1.0) - (2.0 + 0.5 / (9.0 + 1.0))) < 1e-12

    def test_term_integral(self):
        # integral of weight * h^2/((w-c)^2+h^2) over the line = w pi h
        sd = LorentzianSum(((1.7, 0.4, 0.9),))
        omega = np.linspace(-20000.0, 20000.0, 4_000_001)
        num = np.trapezoid(eval_sd(sd, omega), omega)
        assert abs(num - 1.7 * np.pi * 0.9) < 2e-4

    def test_rejects_negative_total(self):
        with pytest.raises(ValueError, match="negative"):
            LorentzianSum(((1.0, 0.0, 1.0), (-2.0, 0.0, 1.0)))

    def test_allows_negative_term_with_positive_total(self):
        sd = LorentzianSum(((1.0, 0.0, 2.0), (-0.2, 0.0, 0.5)))
        assert eval_sd(sd, 0.0) > 0.0

    def test_rejects_nonpositive_half_width(self):
        with pytest.raises(ValueError):
            LorentzianSum(((1.0, 0.0, 0.0),))


class TestDephasingSeries:
    def test_requires_overdamping(self):
        with pytest.raises(ValueError):
            DephasingSeries(gamma=1.0, big_g=1.0)

    def test_derived_quantities(self):
        sd = DephasingSeries(gamma=3.0, big_g=1.0)
        assert abs(sd.kappa - np.sqrt(5.0)) < 1e-14
        assert abs(sd.ratio - (3.0 - sd.kappa) / (3.0 + sd.kappa)) < 1e-15

    def test_geometric_term_weights(self):
        sd = DephasingSeries(gamma=3.0, big_g=1.0)
        terms = list(sd.lorentzian_terms())
        kc, r = sd.kappa, sd.ratio
        for m, (w, c, h) in enumerate(terms[:5], start=1):
            assert abs(w - kc * r**m) < 1e-14
            assert c == 0.0
            assert abs(h - 2.0 * kc * m) < 1e-14

    def test_uncoupled_limit_is_empty(self):
        sd = DephasingSeries(gamma=2.0, big_g=0.0)
        assert list(sd.lorentzian_terms()) == []
        assert eval_sd(sd, 1.0) == 0.0

    def test_strongly_overdamped_is_nearly_one_lorentzian(self):
        # gamma >> G: the m = 1 term dominates with weight ~ G^2/gamma
        sd = DephasingSeries(gamma=50.0, big_g=1.0)
        omega = np.linspace(0.0, 20.0, 40)
        kc, r = sd.kappa, sd.ratio
        single = LorentzianSum(((kc * r, 0.0, 2.0 * kc),))
        rel = np.abs(eval_sd(sd, omega) - eval_sd(single, omega)) / eval_sd(
            sd, omega
        )
        assert np.max(rel) < 2e-3


class TestMemoryKernel:
    def test_zero_lag_total_weight(self):
        sd = LorentzianSum(((1.2, 0.5, 0.8), (0.4, -1.0, 2.0)))
        oracle = 1.2 * np.pi * 0.8 + 0.4 * np.pi * 2.0
        assert abs(memory_kernel(sd, 0.0) - oracle) < 1e-13

    def test_single_term_decay_and_rotation(self):
        sd = LorentzianSum(((1.0, 2.0, 0.5),))
        dt, omega0 = 1.3, 0.7
        oracle = np.pi * 0.5 * np.exp(1j * (omega0 - 2.0) * dt - 0.5 * dt)
        assert abs(memory_kernel(sd, dt, omega0) - oracle) < 1e-13

    def test_rejects_negative_lag(self):
        with pytest.raises(ValueError):
            memory_kernel(LorentzianSum(((1.0, 0.0, 1.0),)), -0.1)

    @pytest.mark.parametrize("dt", [0.0, 0.2, 1.0, 3.7])
    def test_closed_form_matches_quadrature(self, dt):
        sd = LorentzianSum(((1.1, 0.6, 0.9), (0.3, -0.8, 1.7)))
        closed = memory_kernel(sd, dt, omega0=0.4)
        quad = memory_kernel_quadrature(sd, dt, omega0=0.4)
        assert abs(closed - quad) < 1e-8

    def test_series_kernel_matches_quadrature(self):
        sd = DephasingSeries(gamma=3.0, big_g=1.0)
        for dt in (0.1, 0.8):
            assert abs(memory_kernel(sd, dt) - memory_kernel_quadrature(sd, dt)) < 1e-8


class TestVolterra:
    def test_empty_density_keeps_amplitude_constant(self):
        t_grid = np.linspace(0.0, 3.0, 31)
        eps = solve_volterra(LorentzianSum(()), 0.0, t_grid)
        assert np.max(np.abs(eps - 1.0)) < 1e-12

    def test_grid_validation(self):
        sd = LorentzianSum(((1.0, 0.0, 1.0),))
        with pytest.raises(ValueError):
            solve_volterra(sd, 0.0, np.array([0.5, 1.0]))
        with pytest.raises(ValueError):
            solve_volterra(sd, 0.0, np.array([0.0, 0.1, 0.3]))
        with pytest.raises(ValueError):
            solve_volterra(sd, 0.0, np.linspace(0, 1, 11), method="simpson")

    def test_single_lorentzian_matches_amplitude_closed_form(self):
        # a single resonant Lorentzian of strength gamma0, half-width
        # kappa is exactly the two-amplitude cascade with G =
        # sqrt(gamma0 kappa / 2) and mode line width 2 kappa
        gamma0, kappa = 1.0, 0.5
        sd = LorentzianSum(((gamma0 / (2.0 * np.pi), 0.0, kappa),))
        t_grid = np.linspace(0.0, 8.0, 801)
        eps = solve_volterra(sd, 0.0, t_grid)
        big_g = np.sqrt(gamma0 * kappa / 2.0)
        oracle = analytic_excited_amplitude(0.0, big_g, 2.0 * kappa, t_grid)
        assert np.max(np.abs(eps - oracle)) < 1e-9

    def test_trapezoid_agrees_with_pseudo_mode(self):
        sd = LorentzianSum(((0.3, 0.5, 0.8), (0.2, -0.3, 1.5)))
        t_grid = np.arange(0.0, 4.0 + 1e-12, 2e-3)
        a = solve_volterra(sd, 0.2, t_grid, method="trapezoid")
        b = solve_volterra(sd, 0.2, t_grid, method="pseudo_mode")
        assert np.max(np.abs(a - b)) < 1e-6

    def test_trapezoid_is_second_order(self):
        sd = LorentzianSum(((0.4, 0.0, 1.0),))
        t_max = 2.0
        devs = []
        for h in (4e-2, 2e-2, 1e-2):
            t_grid = np.arange(0.0, t_max + 1e-12, h)
            a = solve_volterra(sd, 0.0, t_grid, method="trapezoid")
            b = solve_volterra(sd, 0.0, t_grid, method="pseudo_mode")
            devs.append(np.max(np.abs(a - b)))
        assert 3.0 < devs[0] / devs[1] < 5.0
        assert 3.0 < devs[1] / devs[2] < 5.0


class TestMapLorentzianToCm:
    def test_pinned_parameter_values(self):
        p = map_lorentzian_to_cm(gamma0=1.0, kappa=0.25, delta=0.1, tau=0.5)
        assert abs(p.big_g - 0.25) < 1e-15  # sqrt(gamma0 kappa)/2
        assert abs(p.small_g - 1.0) < 1e-15  # sqrt(2 kappa / tau)
        assert abs(p.gamma - 2.0 * 0.25) < 1e-15  # g^2 tau = 2 kappa
        assert p.delta == 0.1 and p.tau == 0.5

    def test_rejects_nonpositive_inputs(self):
        with pytest.raises(ValueError):
            map_lorentzian_to_cm(0.0, 1.0, 0.0, 0.1)
        with pytest.raises(ValueError):
            map_lorentzian_to_cm(1.0, 1.0, 0.0, -0.1)


class TestDephasingRateFromSd:
    def test_zero_time(self):
        sd = LorentzianSum(((1.0, 0.0, 1.0),))
        assert dephasing_rate_from_sd(sd, 0.0) == 0.0

    def test_zero_centered_closed_form(self):
        sd = LorentzianSum(((1.3, 0.0, 0.7),))
        for t in (0.2, 1.0, 5.0):
            oracle = 1.3 * (1.0 - np.exp(-0.7 * t))
            assert abs(dephasing_rate_from_sd(sd, t) - oracle) < 1e-12

    def test_offset_center_falls_back_to_quadrature(self):
        # consistency: shifting the center to 0 must reproduce the
        # closed form through the quadrature path
        sd0 = LorentzianSum(((1.0, 0.0, 0.8),))
        sd_eps = LorentzianSum(((1.0, 1e-9, 0.8),))
        for t in (0.5, 2.0):
            assert abs(
                dephasing_rate_from_sd(sd0, t) - dephasing_rate_from_sd(sd_eps, t)
            ) < 1e-5

    def test_series_reproduces_model_rate(self):
        gamma, big_g = 3.0, 1.0
        sd = DephasingSeries(gamma=gamma, big_g=big_g)
        for t in (0.3, 1.0, 2.5):
            oracle = dephasing_rate(gamma, big_g, t)
            assert abs(dephasing_rate_from_sd(sd, t) - oracle) < 1e-8


class TestSdFromDephasingRate:
    def test_exponential_settling_rate_closed_form(self):
        # gamma(t) = g0 (1 - e^{-h t}) <-> one zero-centered Lorentzian
        g0, h = 1.4, 0.9
        for omega in (0.3, 1.0, 7.0):
            out = sd_from_dephasing_rate(
                lambda t: g0 * (1.0 - np.exp(-h * t)), omega, t_max=40.0
            )
            oracle = g0 * h**2 / (omega**2 + h**2)
            assert abs(out - oracle) < 1e-6

    def test_constant_rate_gives_flat_density(self):
        for omega in (0.5, 3.0):
            out = sd_from_dephasing_rate(lambda t: 2.0, omega, t_max=10.0)
            assert abs(out - 2.0) < 1e-10

    def test_model_rate_round_trip(self):
        gamma, big_g = 3.0, 1.0
        sd = DephasingSeries(gamma=gamma, big_g=big_g)
        t_max = 20.0 / (2.0 * sd.kappa)
        for omega in (0.5, 2.0, 10.0):
            out = sd_from_dephasing_rate(
                lambda t: dephasing_rate(gamma, big_g, t), omega, t_max
            )
            ref = eval_sd(sd, omega)
            assert abs(out - ref) / ref < 1e-4

    def test_rejects_unsettled_rate(self):
        with pytest.raises(ValueError, match="settled"):
            sd_from_dephasing_rate(lambda t: t, 1.0, t_max=5.0)

    def test_rejects_nonpositive_frequency(self):
        with pytest.raises(ValueError):
            sd_from_dephasing_rate(lambda t: 1.0, 0.0, t_max=5.0)


def test_dephasing_series_equals_rate_transform_on_a_grid():
    # round trip J -> gamma -> J across a frequency window
    gamma, big_g = 3.0, 1.0
    sd = DephasingSeries(gamma=gamma, big_g=big_g)
    t_max = 20.0 / (2.0 * sd.kappa)
    for omega in np.linspace(0.5, 25.0, 8):
        direct = eval_sd(sd, float(omega))
        via_rate = sd_from_dephasing_rate(
            lambda t: dephasing_rate(gamma, big_g, t), float(omega), t_max
        )
        assert abs(direct - via_rate) / direct < 1e-3


def test_dephasing_factor_matches_exponentiated_rate_integral():
    # f(t) = exp(-2 int_0^t gamma(s) ds) ties the rate back to the factor
    import scipy.integrate

    gamma, big_g, t = 3.0, 1.0, 1.7
    integral, _ = scipy.integrate.quad(
        lambda s: dephasing_rate(gamma, big_g, s), 0.0, t, epsabs=1e-12
    )
    assert abs(
        np.exp(-2.0 * integral) - dephasing_factor_continuous(gamma, big_g, t)
    ) < 1e-9
