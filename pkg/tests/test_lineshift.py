"""Tests for moving the integration line and collecting residues."""

import math

import mpmath as mp
import numpy as np
import pytest
from numpy.testing import assert_allclose

from perronkit import kernels, lineshift, perron, series

mp.mp.dps = 30

KERNEL = kernels.build_pm(3, 1)
ONES = series.catalog("ones")
ETA = series.catalog("eta")


def make_config(series_d, kappa, kappa_prime, T, **kw):
    return lineshift.ShiftConfig(
        kappa=kappa, kappa_prime=kappa_prime, T=T, kernel=KERNEL, series=series_d, **kw
    )


class TestShiftConfig:
    def test_v_defaults_to_strip_width_over_two_pi(self):
        """Omitting V picks the minimal rectangle covering the strip."""
        cfg = make_config(ONES, 1.5, 0.6, 5.0)
        assert_allclose(
            cfg.V,
            0.9 / (2.0 * math.pi),
            rtol=1e-15,
            err_msg="default V is not (kappa - kappa_prime)/(2 pi)",
        )

    def test_rejects_unordered_lines(self):
        with pytest.raises(ValueError, match="strictly below"):
            make_config(ONES, 0.6, 1.5, 5.0)

    def test_rejects_small_T(self):
        with pytest.raises(ValueError, match="T must be at least 1"):
            make_config(ONES, 1.5, 0.6, 0.5)

    def test_rejects_negative_V(self):
        with pytest.raises(ValueError, match="nonnegative"):
            make_config(ONES, 1.5, 0.6, 5.0, V=-0.1)

    def test_rejects_bad_quad_tol(self):
        with pytest.raises(ValueError, match="quad_tol"):
            make_config(ONES, 1.5, 0.6, 5.0, quad_tol=0.0)


class TestComputeM:
    def test_real_line_maximum_of_derivative(self):
        """At V=0 the bound is the largest slope of the kernel itself,
        attained at the midpoint of the middle flank piece."""
        cfg = make_config(ONES, 1.5, 1.4, 5.0, V=0.0)
        assert_allclose(
            lineshift.compute_M(cfg),
            2.25,
            rtol=1e-9,
            err_msg="max |phi'| of the m=3, delta=1 kernel should be 9/4",
        )

    def test_matches_dense_gradient_grid(self):
        cfg = make_config(ONES, 1.5, 1.4, 5.0, V=0.0)
        t = np.linspace(-2.0, 2.0, 800_001)
        slopes = np.abs(np.gradient(kernels.eval(KERNEL, t), t[1] - t[0]))
        assert slopes.max() <= lineshift.compute_M(cfg) + 1e-5

    def test_nondecreasing_in_v(self):
        """A taller rectangle can only increase the supremum."""
        values = [
            lineshift.compute_M(make_config(ONES, 1.5, 1.4, 5.0, V=v))
            for v in (0.0, 0.05, 0.15, 0.3, 0.6)
        ]
        assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))

    def test_dominates_interior_samples(self):
        """M certifies |piece derivative| on a grid over every piece
        rectangle, not only on the boundary."""
        v_top = 0.22
        cfg = make_config(ONES, 1.5, 1.4, 5.0, V=v_top)
        big_m = lineshift.compute_M(cfg)
        bp = [float(b) for b in KERNEL.breakpoints]
        worst = 0.0
        for j, piece in enumerate(KERNEL.pieces):
            dcoef = np.array([float(c) for c in kernels.poly_derivative(piece)])
            u = np.linspace(bp[j], bp[j + 1], 101)
            v = np.linspace(0.0, v_top, 41)
            z = u[:, None] + 1j * v[None, :]
            d = np.polynomial.polynomial.polyval(z, dcoef.astype(complex))
            worst = max(worst, float(np.abs(d).max()))
        assert worst <= big_m * (1.0 + 1e-12)


class TestResidueTerms:
    def test_constant_stream_pole_gives_exactly_x(self):
        """Pole at s=1 with residue 1: the rescaled argument is purely
        imaginary, lands on the plateau, and the weight is exactly 1."""
        cfg = make_config(ONES, 1.5, 0.6, 5.0)
        terms = lineshift.residue_terms(cfg, 10.0)
        assert len(terms) == 1
        pole, contribution = terms[0]
        assert pole == 1.0 + 0j
        assert_allclose(
            complex(contribution),
            10.0 + 0j,
            rtol=1e-13,
            err_msg="residue contribution of the s=1 pole at x=10 is x itself",
        )

    def test_entire_stream_gives_empty_list(self):
        cfg = make_config(ETA, 0.9, 0.4, 5.0)
        assert lineshift.residue_terms(cfg, 10.0) == []

    def test_origin_pole_uses_f_at_zero(self):
        """With kappa' < 0 < kappa the 1/s pole contributes F(0) times a
        plateau weight of exactly 1; for the alternating stream F(0)=1/2."""
        cfg = make_config(ETA, 0.6, -0.2, 5.0)
        terms = lineshift.residue_terms(cfg, 10.0)
        assert len(terms) == 1
        pole, contribution = terms[0]
        assert pole == 0j
        assert_allclose(
            complex(contribution),
            0.5 + 0j,
            atol=1e-12,
            err_msg="origin pole contribution should be eta(0) = 1/2",
        )

    def test_rejects_rectangle_not_covering_strip(self):
        cfg = make_config(ONES, 1.5, 0.6, 5.0, V=0.01)
        with pytest.raises(ValueError, match="cover the strip"):
            lineshift.residue_terms(cfg, 10.0)


class TestHypothesisChecks:
    def test_pole_on_left_line_rejected(self):
        cfg = make_config(ONES, 1.5, 1.0, 5.0)
        with pytest.raises(ValueError, match="kappa_prime"):
            lineshift.residue_terms(cfg, 10.0)

    def test_pole_on_right_line_rejected(self):
        cfg = make_config(ONES, 1.0, 0.5, 5.0)
        with pytest.raises(ValueError, match="!= kappa"):
            lineshift.residue_terms(cfg, 10.0)

    def test_pole_at_horizontal_side_height_rejected(self):
        """A pole whose imaginary part sits exactly on a horizontal side
        (Im = 2 pi u_j T for a breakpoint u_j) violates the hypotheses."""
        bad = series.SeriesDescriptor(
            name="synthetic",
            coeff=lambda n: np.ones_like(np.asarray(n, dtype=float)),
            sigma_c=1.0,
            sigma_a=1.0,
            sigma_0=1.0,
            poles=((0.8 + 2.0 * math.pi * 5.0 * 1j, 1.0 + 0j),),
            continuation=None,
        )
        cfg = make_config(bad, 1.5, 0.6, 5.0)
        with pytest.raises(ValueError, match="Im"):
            lineshift.residue_terms(cfg, 10.0)


class TestShiftVerify:
    def test_constant_stream_collects_its_pole(self):
        """Shifting past s=1 picks up exactly x, and the leftover defect
        stays within the horizontal-side bound."""
        cfg = make_config(ONES, 1.5, 0.6, 5.0)
        report = lineshift.shift_verify(cfg, 10.0)
        assert_allclose(
            complex(report.residue_sum),
            10.0 + 0j,
            rtol=1e-13,
            err_msg="residue sum should be the pole contribution x = 10",
        )
        assert report.defect <= report.horizontal_error_bound + 10.0 * cfg.quad_tol
        assert report.defect == abs(
            report.lhs_integral - report.rhs_integral - report.residue_sum
        )

    def test_defect_shrinks_when_T_doubles(self):
        """The horizontal sides live at height 2 pi u_j T, so their
        contribution decays as T grows."""
        d5 = lineshift.shift_verify(make_config(ONES, 1.5, 0.6, 5.0), 10.0)
        d10 = lineshift.shift_verify(make_config(ONES, 1.5, 0.6, 10.0), 10.0)
        assert d10.defect <= d5.defect
        assert d10.horizontal_error_bound <= d5.horizontal_error_bound

    def test_entire_stream_has_zero_residue_sum(self):
        cfg = make_config(ETA, 0.9, 0.4, 5.0)
        report = lineshift.shift_verify(cfg, 10.0)
        assert report.residue_sum == 0j
        assert report.defect <= report.horizontal_error_bound + 10.0 * cfg.quad_tol

    def test_narrow_strip_shrinks_bound(self):
        """The bound display is proportional to kappa - kappa_prime, so a
        narrower strip gives a smaller bound (and a defect still inside)."""
        wide = lineshift.shift_verify(make_config(ONES, 1.5, 0.6, 5.0), 10.0)
        narrow = lineshift.shift_verify(make_config(ONES, 1.5, 1.4, 5.0), 10.0)
        assert narrow.horizontal_error_bound < wide.horizontal_error_bound
        assert narrow.defect <= narrow.horizontal_error_bound + 10.0 * 1e-9

    def test_per_side_sum_is_pi_times_total(self):
        """The two displayed denominators differ by exactly one factor of
        pi; both are reported so the discrepancy stays visible."""
        report = lineshift.shift_verify(make_config(ONES, 1.5, 0.6, 5.0), 10.0)
        assert_allclose(
            report.per_side_bound_sum,
            math.pi * report.horizontal_error_bound,
            rtol=1e-12,
            err_msg="per-side sum and total should differ by a factor pi",
        )

    def test_real_stream_report_is_real(self):
        report = lineshift.shift_verify(make_config(ONES, 1.5, 0.6, 5.0), 10.0)
        assert report.lhs_integral.imag == 0.0
        assert report.rhs_integral.imag == 0.0

    def test_lhs_matches_unshifted_main_integral(self):
        """The kappa-line integral is the same object the truncated-sum
        evaluator computes; the two code paths must agree."""
        cfg = make_config(ONES, 1.5, 0.6, 5.0)
        report = lineshift.shift_verify(cfg, 10.0)
        pcfg = perron.PerronConfig(kappa=1.5, T=5.0, x=10.0, kernel=KERNEL)
        assert_allclose(
            complex(report.lhs_integral),
            complex(perron.main_integral(ONES, pcfg)),
            atol=1e-7,
            err_msg="kappa-line integral disagrees with the main-term evaluator",
        )

    def test_rejects_x_below_one(self):
        with pytest.raises(ValueError, match="x must be at least 1"):
            lineshift.shift_verify(make_config(ONES, 1.5, 0.6, 5.0), 0.5)

    def test_shifted_line_against_quadrature_oracle(self):
        """The kappa'-line integral for the alternating stream, computed
        independently with mpmath: altzeta plus explicit piece polynomials
        evaluated at t/(2 pi T) + i(kappa - kappa')/(2 pi T)."""
        kappa, kappa_prime, T, x = 0.9, 0.4, 2.0, 5.0
        cfg = make_config(ETA, kappa, kappa_prime, T, quad_tol=1e-10)
        report = lineshift.shift_verify(cfg, x)

        bp = [float(b) for b in KERNEL.breakpoints]
        coefs = [[float(c) for c in piece] for piece in KERNEL.pieces]
        v_off = (kappa - kappa_prime) / (2.0 * math.pi * T)

        def weight(w):
            if w < bp[0] or w >= bp[-1]:
                return mp.mpc(0)
            idx = int(np.searchsorted(bp, w, side="right")) - 1
            z = mp.mpc(w, v_off)
            acc = mp.mpc(0)
            for c in reversed(coefs[idx]):
                acc = acc * z + c
            return acc

        def f(t):
            s = mp.mpc(kappa_prime, t)
            return mp.altzeta(s) * weight(float(t) / (2 * math.pi * T)) * mp.mpf(x) ** s / s

        pieces_t = [2.0 * math.pi * T * b for b in bp if b >= 0]
        val = mp.quad(f, [0.0] + pieces_t)
        oracle = 2.0 * mp.re(val) / (2.0 * math.pi)
        assert_allclose(
            complex(report.rhs_integral),
            complex(oracle),
            atol=1e-8,
            err_msg="shifted-line integral disagrees with the mpmath oracle",
        )


class TestPieceExtension:
    def test_extension_reduces_to_real_eval_on_the_line(self):
        """With zero imaginary offset the piecewise extension is the
        kernel itself, bit for bit."""
        w = np.linspace(-1.999, 1.999, 4001)
        ext = kernels.holo_piece_eval(KERNEL, w.astype(complex))
        direct = kernels.eval(KERNEL, w)
        assert np.all(ext.imag == 0.0)
        assert np.array_equal(ext.real, direct)
