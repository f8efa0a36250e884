"""Uncertainty-model builders against classical enumeration oracles.

The oracles below use scipy.stats directly so they stay independent of the
package's own normal kernels.
"""

import itertools
import math

import numpy as np
import pytest
from scipy import stats

from qvar.circuit import apply, marginal_probability, probabilities, zero_state
from qvar.gaussian import discretize_normal
from qvar.uncertainty import (Asset, Portfolio, build_multi_rotation,
                              build_single_factor, build_single_rotation,
                              fit_linear_rotation, index_sum_plan,
                              probability_loader)

# the running two-asset, two-factor example
ASSETS = [
    Asset(1000.5, 0.15, 0.10, (0.35, 0.20)),
    Asset(2000.5, 0.25, 0.05, (0.10, 0.25)),
]
# frozen from the independent mpmath enumeration
FIT_SLOPE_A0_F0 = -0.1481694174481145
FIT_OFFSET_A0_F0 = 0.9977270138281787


def oracle_pd(asset, z):
    y = float(np.dot(asset.alphas, z))
    return stats.norm.cdf(
        (stats.norm.ppf(asset.p0) - math.sqrt(asset.rho) * y) / math.sqrt(1 - asset.rho))


def oracle_joint(portfolio, grids):
    """Joint distribution over (factor bits..., asset bits...) by enumeration."""
    n_factor = sum(g.n_z for g in grids)
    out = np.zeros(2 ** (n_factor + portfolio.k))
    for combo in itertools.product(*(range(g.size) for g in grids)):
        pz = np.prod([g.probs[i] for g, i in zip(grids, combo)])
        z = [g.values[i] for g, i in zip(grids, combo)]
        pds = [oracle_pd(a, z) for a in portfolio.assets]
        fbits = 0
        shift = 0
        for i, g in zip(combo, grids):
            fbits |= i << shift
            shift += g.n_z
        for pattern in itertools.product((0, 1), repeat=portfolio.k):
            weight = pz * np.prod([p if b else 1 - p for p, b in zip(pds, pattern)])
            abits = sum(b << j for j, b in enumerate(pattern))
            out[fbits | (abits << n_factor)] += weight
    return out


def model_joint(model):
    state = apply(model.circuit, zero_state(model.circuit.n_qubits))
    order = [q for reg in model.factor_qubits for q in reg] + model.asset_qubits
    return probabilities(state, order)


class TestLoader:
    def test_matches_arbitrary_vectors(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            m = int(rng.integers(1, 5))
            probs = rng.uniform(0, 1, 2 ** m)
            probs[rng.random(2 ** m) < 0.25] = 0.0
            if probs.sum() == 0:
                probs[0] = 1.0
            probs /= probs.sum()
            state = apply(probability_loader(probs), zero_state(m))
            assert np.abs(np.abs(state.amplitudes) ** 2 - probs).max() < 1e-12

    def test_grid_marginals(self):
        grid = discretize_normal(3, 0.0, 1.0, 2.5)
        state = apply(probability_loader(grid.probs), zero_state(3))
        assert np.abs(np.abs(state.amplitudes) ** 2 - grid.probs).max() < 1e-10

    def test_rejects_bad_vectors(self):
        with pytest.raises(ValueError):
            probability_loader([0.5, 0.6])


class TestMultiRotationExact:
    def test_table_joint_matches_oracle(self):
        pf = Portfolio(ASSETS)
        grids = [discretize_normal(2), discretize_normal(2)]
        model = build_multi_rotation(pf, grids, "exact")
        assert model.circuit.n_qubits == 6          # 4 factor qubits + 2 assets
        assert np.abs(model_joint(model) - oracle_joint(pf, grids)).max() < 1e-9

    def test_grid_register_marginals_equal_grid_probs(self):
        pf = Portfolio(ASSETS)
        grids = [discretize_normal(2), discretize_normal(2, 0.0, 1.0, 2.0)]
        model = build_multi_rotation(pf, grids, "exact")
        state = apply(model.circuit, zero_state(model.circuit.n_qubits))
        for grid, reg in zip(grids, model.factor_qubits):
            marg = probabilities(state, list(reg))
            assert np.abs(marg - grid.probs).max() < 1e-10

    def test_zero_rho_single_asset(self):
        pf = Portfolio([Asset(10.0, 0.3, 0.0, (1.0,))])
        for encoding in ("exact", "linear"):
            model = build_single_factor(pf, discretize_normal(2), encoding)
            state = apply(model.circuit, zero_state(model.circuit.n_qubits))
            assert marginal_probability(state, model.asset_qubits[0], 1) == pytest.approx(0.3, abs=1e-12)

    def test_single_factor_table_asset(self):
        # first example asset as a single-factor problem with unit weight
        pf = Portfolio([Asset(1000.5, 0.15, 0.10, (1.0,))])
        grid = discretize_normal(2)
        model = build_single_factor(pf, grid, "exact")
        assert np.abs(model_joint(model) - oracle_joint(pf, [grid])).max() < 1e-9

    def test_single_factor_requires_one_factor(self):
        with pytest.raises(ValueError):
            build_single_factor(Portfolio(ASSETS), discretize_normal(2))

    def test_all_zero_weights_marginal(self):
        shared = (0.0, 0.0)
        pf = Portfolio([Asset(1.0, 0.15, 0.10, shared), Asset(2.0, 0.25, 0.05, shared)])
        grids = [discretize_normal(2), discretize_normal(2)]
        model = build_multi_rotation(pf, grids, "exact")
        state = apply(model.circuit, zero_state(model.circuit.n_qubits))
        for asset, q in zip(pf.assets, model.asset_qubits):
            want = stats.norm.cdf(stats.norm.ppf(asset.p0) / math.sqrt(1 - asset.rho))
            assert marginal_probability(state, q, 1) == pytest.approx(want, abs=1e-12)

    def test_width_grows_by_nz_per_factor(self):
        for r in (1, 2, 3):
            assets = [Asset(1.0, 0.2, 0.1, tuple([0.3] * r))]
            grids = [discretize_normal(2) for _ in range(r)]
            model = build_multi_rotation(Portfolio(assets), grids, "linear")
            assert model.circuit.n_qubits == 2 * r + 1

    def test_randomized_joint_property(self):
        rng = np.random.default_rng(5)
        for _ in range(8):
            r = int(rng.integers(1, 3))
            k = int(rng.integers(1, 4))
            grids = [discretize_normal(int(rng.integers(1, 3)), 0.0, 1.0,
                                       float(rng.uniform(1.5, 4.0))) for _ in range(r)]
            assets = [Asset(float(rng.uniform(0, 50)), float(rng.uniform(0.05, 0.6)),
                            float(rng.uniform(0.0, 0.5)),
                            tuple(rng.uniform(-0.5, 0.8, r)))
                      for _ in range(k)]
            pf = Portfolio(assets)
            model = build_multi_rotation(pf, grids, "exact")
            assert model.circuit.n_qubits <= 12
            assert np.abs(model_joint(model) - oracle_joint(pf, grids)).max() < 1e-9

    def test_grid_count_mismatch(self):
        with pytest.raises(ValueError):
            build_multi_rotation(Portfolio(ASSETS), [discretize_normal(2)], "exact")

    def test_conditional_defaults_per_joint_state(self):
        # P(asset k = 1 | factor registers in joint state i) equals the model PD
        pf = Portfolio(ASSETS)
        grids = [discretize_normal(2), discretize_normal(2)]
        model = build_multi_rotation(pf, grids, "exact")
        state = apply(model.circuit, zero_state(model.circuit.n_qubits))
        for k, asset in enumerate(pf.assets):
            order = [q for reg in model.factor_qubits for q in reg] + [model.asset_qubits[k]]
            joint = probabilities(state, order)
            for i1 in range(4):
                for i2 in range(4):
                    fbits = i1 | (i2 << 2)
                    p_joint = joint[fbits] + joint[fbits | (1 << 4)]
                    conditional = joint[fbits | (1 << 4)] / p_joint
                    want = oracle_pd(asset, (grids[0].values[i1], grids[1].values[i2]))
                    assert abs(conditional - want) < 1e-9


class TestLinearEncoding:
    def test_fit_reproduces_endpoints(self):
        grids = [discretize_normal(2), discretize_normal(3, 0.0, 1.0, 2.0)]
        for asset in ASSETS:
            for f, grid in enumerate(grids):
                slope, offset = fit_linear_rotation(asset, f, grids)
                mids = [g.mid_value for g in grids]
                for i in (0, grid.size - 1):
                    z = list(mids)
                    z[f] = grid.values[i]
                    true_theta = 2 * math.asin(math.sqrt(oracle_pd(asset, z)))
                    assert abs(slope * i + offset - true_theta) < 1e-12

    def test_fit_frozen_value(self):
        grids = [discretize_normal(2), discretize_normal(2)]
        slope, offset = fit_linear_rotation(ASSETS[0], 0, grids)
        assert abs(slope - FIT_SLOPE_A0_F0) < 1e-12
        assert abs(offset - FIT_OFFSET_A0_F0) < 1e-12

    def test_constant_angle_for_zero_rho(self):
        asset = Asset(5.0, 0.2, 0.0, (0.4, 0.1))
        grids = [discretize_normal(2), discretize_normal(2)]
        slope, offset = fit_linear_rotation(asset, 0, grids)
        assert slope == pytest.approx(0.0, abs=1e-14)
        assert offset == pytest.approx(2 * math.asin(math.sqrt(0.2)), abs=1e-12)

    def test_linear_equals_exact_at_zero_rho(self):
        shared_kwargs = dict(p0=0.25, rho=0.0)
        pf = Portfolio([Asset(1.0, alphas=(0.35, 0.2), **shared_kwargs),
                        Asset(2.0, alphas=(0.1, 0.25), **shared_kwargs)])
        grids = [discretize_normal(2), discretize_normal(2)]
        exact = model_joint(build_multi_rotation(pf, grids, "exact"))
        linear = model_joint(build_multi_rotation(pf, grids, "linear"))
        assert np.abs(exact - linear).max() < 1e-12

    def test_linear_converges_to_exact_as_rho_vanishes(self):
        grids = [discretize_normal(2), discretize_normal(2)]
        for rho in (1e-12, 1e-13):
            pf = Portfolio([Asset(1.0, 0.15, rho, (0.35, 0.2)),
                            Asset(2.0, 0.25, rho, (0.1, 0.25))])
            exact = model_joint(build_multi_rotation(pf, grids, "exact"))
            linear = model_joint(build_multi_rotation(pf, grids, "linear"))
            assert np.abs(exact - linear).max() < 1e-10

    def test_single_factor_unit_weight_matches_multi(self):
        # R=1 with alpha=1: the general combination and the classic form agree
        pf = Portfolio([Asset(3.0, 0.2, 0.15, (1.0,))])
        grid = discretize_normal(2)
        a = model_joint(build_single_factor(pf, grid, "exact"))
        b = model_joint(build_multi_rotation(pf, [grid], "exact"))
        assert np.abs(a - b).max() < 1e-12

    def test_rotation_block_count(self):
        # linear encoding: one affine block per (asset, factor) pair
        pf = Portfolio(ASSETS)
        grids = [discretize_normal(2), discretize_normal(2)]
        model = build_multi_rotation(pf, grids, "linear")
        ry_on_assets = [g for g in model.circuit.gates
                        if g.kind == "ry" and g.target in model.asset_qubits]
        # per asset: 1 offset rotation + n_z controlled per factor
        assert len(ry_on_assets) == 2 * (1 + 2 + 2)


class TestSingleRotation:
    SHARED = (0.35, 0.20)

    def portfolio(self):
        return Portfolio([Asset(1000.5, 0.15, 0.10, self.SHARED),
                          Asset(2000.5, 0.25, 0.05, self.SHARED)])

    def test_heterogeneous_alphas_rejected(self):
        grids = [discretize_normal(2), discretize_normal(2)]
        with pytest.raises(ValueError, match="asset 1"):
            build_single_rotation(Portfolio(ASSETS), grids, ASSETS[0].alphas)

    def test_marginals_match_sum_grid_oracle(self):
        pf = self.portfolio()
        grids = [discretize_normal(2), discretize_normal(2)]
        model = build_single_rotation(pf, grids, self.SHARED)
        plan = index_sum_plan(grids, self.SHARED)

        # classical convolution over the induced sum grid
        per_factor = []
        for grid, alpha, n_r, base in zip(grids, self.SHARED, plan.n_points, plan.bases):
            values = base + plan.delta * np.arange(n_r)
            dens = stats.norm.pdf(values / abs(alpha))
            per_factor.append(dens / dens.sum())
        sum_probs = np.zeros(plan.s_max + 1)
        for combo in itertools.product(*(range(n) for n in plan.n_points)):
            sum_probs[sum(combo)] += np.prod([per_factor[r][i] for r, i in enumerate(combo)])

        y_lo = plan.y_of_sum(0)
        y_hi = plan.y_of_sum(plan.s_max)
        state = apply(model.circuit, zero_state(model.circuit.n_qubits))
        for asset, q in zip(pf.assets, model.asset_qubits):
            def theta_at(y):
                pd = stats.norm.cdf(
                    (stats.norm.ppf(asset.p0) - math.sqrt(asset.rho) * y) / math.sqrt(1 - asset.rho))
                return 2 * math.asin(math.sqrt(pd))
            slope = (theta_at(y_hi) - theta_at(y_lo)) / plan.s_max
            offset = theta_at(y_lo)
            want = sum(p * math.sin(0.5 * (offset + slope * s)) ** 2
                       for s, p in enumerate(sum_probs))
            assert marginal_probability(state, q, 1) == pytest.approx(want, abs=1e-10)

    def test_sum_register_uncomputed(self):
        pf = self.portfolio()
        grids = [discretize_normal(2), discretize_normal(2)]
        model = build_single_rotation(pf, grids, self.SHARED)
        state = apply(model.circuit, zero_state(model.circuit.n_qubits))
        assert probabilities(state, model.ancilla_qubits)[0] == pytest.approx(1.0, abs=1e-10)

    def test_reduces_to_single_factor_linear_at_r1(self):
        pf = Portfolio([Asset(7.0, 0.2, 0.1, (1.0,)), Asset(3.0, 0.3, 0.2, (1.0,))])
        grid = discretize_normal(2)
        single = build_single_rotation(pf, [grid], (1.0,))
        linear = build_single_factor(pf, grid, "linear")
        s_state = apply(single.circuit, zero_state(single.circuit.n_qubits))
        l_state = apply(linear.circuit, zero_state(linear.circuit.n_qubits))
        s_joint = probabilities(s_state, list(single.factor_qubits[0]) + single.asset_qubits)
        l_joint = probabilities(l_state, list(linear.factor_qubits[0]) + linear.asset_qubits)
        assert np.abs(s_joint - l_joint).max() < 1e-9

    def test_one_rotation_block_per_asset(self):
        # controlled rotations on each asset touch only the sum register, and
        # their count does not grow with the number of factors
        def controlled_ry_count(r):
            shared = tuple([0.3] * r)
            assets = [Asset(1.0, 0.2, 0.1, shared), Asset(2.0, 0.25, 0.05, shared)]
            grids = [discretize_normal(1) for _ in range(r)]
            model = build_single_rotation(Portfolio(assets), grids, shared)
            counts = []
            for q in model.asset_qubits:
                gates = [g for g in model.circuit.gates if g.kind == "ry" and g.target == q]
                assert all(set(c for c, _ in g.controls) <= set(model.ancilla_qubits)
                           for g in gates)
                counts.append(len(gates))
            return counts, model

        counts2, model2 = controlled_ry_count(2)
        counts3, model3 = controlled_ry_count(3)
        n_sum2 = len(model2.ancilla_qubits)
        n_sum3 = len(model3.ancilla_qubits)
        assert counts2 == [1 + n_sum2] * 2
        assert counts3 == [1 + n_sum3] * 2

    def test_zero_weight_factor(self):
        shared = (0.4, 0.0)
        pf = Portfolio([Asset(1.0, 0.2, 0.1, shared)])
        grids = [discretize_normal(2), discretize_normal(2)]
        model = build_single_rotation(pf, grids, shared)
        plan = index_sum_plan(grids, shared)
        assert plan.n_points[1] == 1
        state = apply(model.circuit, zero_state(model.circuit.n_qubits))
        assert abs(state.norm() - 1) < 1e-10


class TestValidation:
    def test_asset_validation(self):
        with pytest.raises(ValueError):
            Asset(-1.0, 0.2, 0.1, (1.0,))
        with pytest.raises(ValueError):
            Asset(1.0, 0.0, 0.1, (1.0,))
        with pytest.raises(ValueError):
            Asset(1.0, 0.2, 1.0, (1.0,))

    def test_portfolio_requires_uniform_factor_count(self):
        with pytest.raises(ValueError, match="asset 1"):
            Portfolio([Asset(1.0, 0.2, 0.1, (1.0,)), Asset(1.0, 0.2, 0.1, (1.0, 0.5))])
