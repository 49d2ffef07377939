import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import tiltdiff as td
from tiltdiff.errors import CoverageWarning, SizeError
from tiltdiff.transport import DiscreteMeasure1D, sliced_wp_projections


def measure_1d(values, weights=None):
    return DiscreteMeasure1D.from_samples(values, weights)


class TestWp1d:
    def test_identical_measures_zero(self):
        a = measure_1d([0.0, 1.0, 2.5], [0.2, 0.3, 0.5])
        assert td.wp_1d(a, a, 1.0) == 0.0
        assert td.wp_1d(a, a, 2.0) == 0.0

    def test_uniform_two_point_hand_values(self):
        a = measure_1d([0.0, 1.0])
        b = measure_1d([0.0, 2.0])
        assert td.wp_1d(a, b, 1.0) == pytest.approx(0.5, abs=1e-14)
        assert td.wp_1d(a, b, 2.0) == pytest.approx(np.sqrt(0.5), abs=1e-14)

    def test_mass_mismatch_hand_value(self):
        a = measure_1d([0.0, 1.0], [0.75, 0.25])
        b = measure_1d([0.0, 1.0], [0.5, 0.5])
        assert td.wp_1d(a, b, 1.0) == pytest.approx(0.25, abs=1e-14)

    def test_atom_merging(self):
        a = measure_1d([1.0, 1.0, 0.0], [0.25, 0.25, 0.5])
        b = measure_1d([0.0, 1.0], [0.5, 0.5])
        assert td.wp_1d(a, b, 1.0) == 0.0

    @given(st.data())
    @settings(max_examples=60, deadline=None)
    def test_metric_axioms_on_random_triples(self, data):
        def rand_measure():
            k = data.draw(st.integers(1, 5))
            pos = data.draw(st.lists(st.integers(-20, 20), min_size=k, max_size=k,
                                     unique=True))
            w = np.array(data.draw(st.lists(st.integers(1, 9), min_size=k, max_size=k)),
                         dtype=float)
            return measure_1d(np.array(pos, dtype=float) / 4.0, w / w.sum())

        p = data.draw(st.sampled_from([1.0, 2.0, 3.0]))
        a, b, c = rand_measure(), rand_measure(), rand_measure()
        dab = td.wp_1d(a, b, p)
        dba = td.wp_1d(b, a, p)
        assert dab == dba  # symmetry is exact: the integrand is symmetric
        assert td.wp_1d(a, c, p) <= dab + td.wp_1d(b, c, p) + 1e-9

    @given(scale=st.floats(0.01, 100.0), p=st.sampled_from([1.0, 2.0, 4.0]))
    @settings(max_examples=40, deadline=None)
    def test_scaling_law(self, scale, p):
        a = measure_1d([0.0, 1.0, 3.0], [0.5, 0.25, 0.25])
        b = measure_1d([-1.0, 2.0], [0.5, 0.5])
        sa = measure_1d(scale * a.positions, a.masses)
        sb = measure_1d(scale * b.positions, b.masses)
        assert td.wp_1d(sa, sb, p) == pytest.approx(scale * td.wp_1d(a, b, p), rel=1e-12)

    def test_convergence_of_empirical_measures(self):
        medians = []
        for n in [100, 1000, 10000]:
            vals = []
            for seed in range(20):
                rng = np.random.default_rng([n, seed])
                a = measure_1d(rng.normal(size=n))
                b = measure_1d(rng.normal(size=n))
                vals.append(td.wp_1d(a, b, 2.0))
            medians.append(np.median(vals))
        assert medians[0] > medians[1] > medians[2]


def brute_force_wp(x, y, p):
    n = x.shape[0]
    best = np.inf
    for perm in itertools.permutations(range(n)):
        cost = np.mean(np.linalg.norm(x - y[list(perm)], axis=1) ** p)
        best = min(best, cost)
    return best ** (1.0 / p)


class TestExactWpSmall:
    def test_identity_zero_any_order(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(5, 3))
        assert td.exact_wp_small(td.Dataset(x), td.Dataset(x[::-1]), 2.0) == pytest.approx(0.0, abs=1e-12)

    def test_hand_matchings(self):
        x = td.Dataset([[0.0, 0.0], [1.0, 0.0]])
        y = td.Dataset([[0.0, 0.0], [0.0, 1.0]])
        assert td.exact_wp_small(x, y, 2.0) == pytest.approx(1.0, rel=1e-12)
        assert td.exact_wp_small(x, y, 1.0) == pytest.approx(np.sqrt(2) / 2, rel=1e-12)

    def test_single_point_plain_distance(self):
        x = td.Dataset([[1.0, 2.0]])
        y = td.Dataset([[4.0, 6.0]])
        assert td.exact_wp_small(x, y, 1.0) == pytest.approx(5.0)

    def test_size_cap(self):
        x = td.Dataset(np.zeros((9, 1)))
        with pytest.raises(SizeError):
            td.exact_wp_small(x, x, 2.0)

    def test_matches_permutation_enumeration(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            n = int(rng.integers(1, 9))
            d = int(rng.integers(1, 4))
            p = float(rng.choice([1.0, 2.0, 3.0]))
            x = rng.normal(size=(n, d))
            y = rng.normal(size=(n, d))
            got = td.exact_wp_small(td.Dataset(x), td.Dataset(y), p)
            want = brute_force_wp(x, y, p)
            assert got == pytest.approx(want, rel=1e-10)


class TestSlicedWp:
    def test_identical_inputs_zero(self):
        x = td.Dataset(np.random.default_rng(0).normal(size=(20, 3)))
        assert td.sliced_wp(x, x, 2.0, 16, np.random.default_rng(1)) == 0.0

    def test_1d_equals_quantile_coupling(self):
        rng = np.random.default_rng(5)
        x = td.Dataset(rng.normal(size=(40, 1)))
        y = td.Dataset(rng.normal(size=(40, 1)))
        direct = td.wp_1d(measure_1d(x.points[:, 0]), measure_1d(y.points[:, 0]), 2.0)
        for seed in (0, 1, 2):
            assert td.sliced_wp(x, y, 2.0, 8, np.random.default_rng(seed)) == pytest.approx(direct, rel=1e-12)

    def test_point_mass_pair_matches_sphere_moment(self):
        x = td.Dataset([[0.0, 0.0]])
        y = td.Dataset([[1.0, 0.0]])
        got = td.sliced_wp(x, y, 2.0, 4096, np.random.default_rng(3))
        assert got == pytest.approx(np.sqrt(0.5), abs=0.02)

    def test_weighted_measures_accepted(self):
        ds = td.Dataset([[0.0], [1.0]])
        mu = td.WeightedMeasure(atoms=ds, weights=[0.75, 0.25])
        nu = td.WeightedMeasure(atoms=ds, weights=[0.5, 0.5])
        got = td.sliced_wp(mu, nu, 1.0, 4, np.random.default_rng(0))
        assert got == pytest.approx(0.25, rel=1e-12)

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(8)
        x = td.Dataset(rng.normal(size=(30, 4)))
        y = td.Dataset(rng.normal(size=(30, 4)))
        a = td.sliced_wp(x, y, 2.0, 32, np.random.default_rng(11))
        b = td.sliced_wp(x, y, 2.0, 32, np.random.default_rng(11))
        assert a == b

    def test_sliced_below_exact_with_projection_margin(self):
        rng = np.random.default_rng(21)
        for trial in range(10):
            n = int(rng.integers(2, 9))
            d = int(rng.integers(2, 4))
            x = rng.normal(size=(n, d))
            y = rng.normal(size=(n, d))
            exact = td.exact_wp_small(td.Dataset(x), td.Dataset(y), 2.0)
            diameter = max(np.linalg.norm(x, axis=1).max(), np.linalg.norm(y, axis=1).max()) * 2
            assert exact <= diameter + 1e-12
            per = sliced_wp_projections(td.Dataset(x), td.Dataset(y), 2.0, 4096,
                                        np.random.default_rng(trial))
            mean_p = np.mean(per ** 2)
            se_p = np.std(per ** 2, ddof=1) / np.sqrt(per.size)
            sliced = mean_p ** 0.5
            se_sliced = 0.5 * se_p / max(sliced, 1e-12)
            assert sliced <= exact + 3 * se_sliced


class TestTvHistogram:
    def grid1(self, bins=2):
        return td.HistogramGrid(bins=(bins,), ranges=((-0.5, 1.5),))

    def test_identical_zero(self):
        x = td.Dataset(np.random.default_rng(0).random((100, 1)))
        assert td.tv_histogram(x, x, self.grid1(10)) == 0.0

    def test_disjoint_supports_one(self):
        x = td.Dataset(np.zeros((50, 1)))
        y = td.Dataset(np.ones((50, 1)))
        assert td.tv_histogram(x, y, self.grid1(2)) == 1.0

    def test_two_coin_laws(self):
        rng = np.random.default_rng(3)
        n = 100000
        x = td.Dataset((rng.random((n, 1)) < 0.5).astype(float))
        y = td.Dataset((rng.random((n, 1)) < 2 / 3).astype(float))
        tv = td.tv_histogram(x, y, self.grid1(2))
        assert tv == pytest.approx(1 / 6, abs=0.02)

    def test_out_of_range_warns_and_counts_boundary(self):
        x = td.Dataset([[5.0]])
        y = td.Dataset([[1.0]])
        with pytest.warns(CoverageWarning):
            tv = td.tv_histogram(x, y, self.grid1(2))
        assert tv == 0.0  # the stray lands in the same boundary cell as y

    def test_dimension_cap(self):
        x = td.Dataset(np.zeros((4, 4)))
        grid = td.HistogramGrid(bins=(2,) * 4, ranges=(((-1.0, 1.0),) * 4))
        with pytest.raises(SizeError):
            td.tv_histogram(x, x, grid)


class TestSetDiscrepancy:
    def test_equal_measures_zero(self):
        ds = td.Dataset([[0.0], [1.0]])
        mu = td.WeightedMeasure(atoms=ds, weights=[0.4, 0.6])
        boxes = [td.Box(lo=[-1.0], hi=[0.5]), td.Box(lo=[0.5], hi=[2.0])]
        assert np.all(td.set_discrepancy(mu, mu, boxes) == 0.0)

    def test_point_masses(self):
        mu = td.WeightedMeasure(atoms=td.Dataset([[0.0]]), weights=[1.0])
        nu = td.WeightedMeasure(atoms=td.Dataset([[1.0]]), weights=[1.0])
        out = td.set_discrepancy(mu, nu, [td.Box(lo=[-0.5], hi=[0.5])])
        assert out == pytest.approx([1.0])

    def test_weighted_difference(self):
        ds = td.Dataset([[0.0], [1.0]])
        mu = td.WeightedMeasure(atoms=ds, weights=[1 / 3, 2 / 3])
        nu = td.WeightedMeasure(atoms=ds, weights=[0.5, 0.5])
        out = td.set_discrepancy(mu, nu, [td.Box(lo=[0.5], hi=[1.5])])
        assert out == pytest.approx([1 / 6])

    def test_half_open_convention_partitions_mass(self):
        rng = np.random.default_rng(9)
        ds = td.Dataset(rng.random((50, 1)))
        mu = td.plugin_measure(ds, td.TiltSpec(theta=[1.0]))
        edges = [0.0, 0.25, 0.5, 0.75, 1.0 + 1e-9]
        boxes = [td.Box(lo=[a], hi=[b]) for a, b in zip(edges[:-1], edges[1:])]
        from tiltdiff.transport import box_mass
        total = sum(box_mass(mu, b) for b in boxes)
        assert total == pytest.approx(1.0, abs=1e-12)
