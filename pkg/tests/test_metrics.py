import numpy as np
import pytest

from fitscape.cellspace import encode, hamming
from fitscape.errors import MetricError
from fitscape.fitness import EvalRecord, FitnessTable, NKConfig, SourceId, nk_enumerate
from fitscape.metrics import (
    fdc,
    fitness_stats,
    local_optima_exhaustive,
    local_optima_sampled,
    moving_average,
    rho1,
    ruggedness_tau,
)
from fitscape.sampling import lhs_sample


class TestStats:
    def test_constant_pair(self):
        s = fitness_stats([0.5, 0.5])
        assert (s.mean, s.std) == (0.5, 0.0)

    def test_two_point_symmetry(self):
        s = fitness_stats([0.0, 1.0])
        assert (s.mean, s.std, s.min, s.max, s.n) == (0.5, 0.5, 0.0, 1.0, 2)

    def test_uniform_mean_within_clt_bound(self):
        n = 5000
        draws = np.random.default_rng(60).uniform(size=n)
        s = fitness_stats(draws)
        assert abs(s.mean - 0.5) < 3.0 * (1.0 / np.sqrt(12.0)) / np.sqrt(n)

    def test_empty_rejected(self):
        with pytest.raises(MetricError) as err:
            fitness_stats([])
        assert err.value.code == "EMPTY"


class TestFdc:
    def test_linear_toy_landscape(self):
        xstar = 0b110100
        samples = [(y, 1.0 - bin(y ^ xstar).count("1") / 6.0) for y in range(64)]
        result = fdc(samples)
        assert len(result.points) == 63
        assert result.pearson_r == pytest.approx(-1.0, abs=1e-9)
        for d, f in result.points:
            assert f == pytest.approx(1.0 - d / 6.0)

    def test_two_samples_single_point(self):
        samples = [(0b01, 0.2), (0b10, 0.9)]
        result = fdc(samples)
        assert len(result.points) == 1
        assert result.points[0][0] == 2
        assert result.pearson_r is None  # single point: both variables constant

    def test_real_genotypes_and_ids(self):
        cells = lhs_sample(10, 5)
        genotypes = [encode(c) for c in cells]
        fitness = [0.1 * i for i in range(10)]
        result = fdc(list(zip(genotypes, fitness)), ids=[f"m{i}" for i in range(10)])
        assert result.optimum_id == "m9"
        assert len(result.points) == 9
        for (d, f), g in zip(result.points, genotypes[:9]):
            assert d == hamming(genotypes[9], g)

    def test_tie_breaks_on_smallest_hex(self):
        samples = [(0b1000, 1.0), (0b0001, 1.0), (0b0010, 0.2)]
        result = fdc(samples)
        assert result.optimum_id == format(0b0001, "016x")

    def test_nk_multiset_matches_independent_enumerator(self):
        cfg = NKConfig(n=10, k=2, seed=404)
        arr = nk_enumerate(cfg)
        samples = [(x, float(arr[x])) for x in range(1 << 10)]
        result = fdc(samples)

        # oracle: straight enumeration with its own argmax and popcount logic
        best, best_f = None, -1.0
        for x in range(1 << 10):
            f = float(arr[x])
            if f > best_f:
                best, best_f = x, f
        oracle_points = sorted(
            (bin(x ^ best).count("1"), float(arr[x])) for x in range(1 << 10) if x != best
        )
        assert sorted(result.points) == oracle_points

    def test_undefined_pearson_on_constant_fitness(self):
        samples = [(0b001, 0.5), (0b010, 0.5), (0b100, 0.5)]
        assert fdc(samples).pearson_r is None

    def test_pearson_invariant_under_positive_affine_fitness(self):
        rng = np.random.default_rng(12)
        xs = rng.choice(1 << 8, size=40, replace=False)
        fs = rng.uniform(size=40)
        base = fdc([(int(x), float(f)) for x, f in zip(xs, fs)])
        scaled = fdc([(int(x), float(3.0 * f + 0.2)) for x, f in zip(xs, fs)])
        assert scaled.pearson_r == pytest.approx(base.pearson_r, abs=1e-12)


class TestRho1:
    def test_constant_series(self):
        with pytest.raises(MetricError) as err:
            rho1([1.0] * 10)
        assert err.value.code == "ZERO_VARIANCE"

    def test_too_short(self):
        with pytest.raises(MetricError) as err:
            rho1([0.0, 1.0])
        assert err.value.code == "TOO_SHORT"

    def test_iid_series_near_zero(self):
        series = np.random.default_rng(8).uniform(size=10000)
        assert abs(rho1(series)) < 0.05

    def test_alternating_near_minus_one(self):
        series = [float(i % 2) for i in range(1000)]
        assert rho1(series) == pytest.approx(-1.0, abs=0.01)

    def test_affine_invariance(self):
        rng = np.random.default_rng(3)
        series = rng.uniform(size=500)
        base = rho1(series)
        for a, b in ((2.5, 1.0), (-3.0, 0.2), (0.1, -7.0)):
            assert rho1(a * series + b) == pytest.approx(base, abs=1e-12)


class TestRuggedness:
    def test_monotone_ramp(self):
        ramp = [i / 100.0 for i in range(101)]
        result = ruggedness_tau(ramp)
        assert result.rho1 > 0.95
        assert 1.0 < result.tau < 1.06
        assert result.flag is None

    def test_alternating_flags_nonpositive(self):
        result = ruggedness_tau([float(i % 2) for i in range(1000)])
        assert result.flag == "NONPOSITIVE_RHO1"
        assert result.tau is None
        assert result.rho1 < 0

    def test_rho1_never_exactly_one(self):
        rng = np.random.default_rng(44)
        for _ in range(200):
            series = rng.uniform(size=int(rng.integers(3, 50)))
            if np.ptp(series) == 0:
                continue
            assert rho1(series) < 1.0


class TestMovingAverage:
    def test_constant(self):
        assert moving_average([2.0] * 10, 5) == [2.0] * 6

    def test_arithmetic_mean(self):
        assert moving_average([1, 2, 3, 4, 5], 5) == [3.0]

    def test_length_contract(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            n = int(rng.integers(1, 40))
            w = int(rng.integers(1, n + 1))
            assert len(moving_average(rng.uniform(size=n), w)) == n - w + 1

    def test_commutes_with_shift(self):
        rng = np.random.default_rng(21)
        series = rng.uniform(size=30)
        lhs = moving_average(series + 3.0, 5)
        rhs = [v + 3.0 for v in moving_average(series, 5)]
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_window_too_large(self):
        with pytest.raises(MetricError) as err:
            moving_average([1.0, 2.0], 3)
        assert err.value.code == "WINDOW_TOO_LARGE"


def brute_force_optima_count(cfg: NKConfig) -> int:
    arr = nk_enumerate(cfg)
    count = 0
    for x in range(1 << cfg.n):
        if all(arr[x] >= arr[x ^ (1 << b)] for b in range(cfg.n)):
            count += 1
    return count


class TestLocalOptima:
    def test_additive_landscape_single_optimum(self):
        for seed in range(10):
            result = local_optima_exhaustive(NKConfig(n=12, k=0, seed=seed))
            assert result.count == 1
            assert not result.estimate

    def test_matches_brute_force(self):
        for seed in (5, 6, 7):
            cfg = NKConfig(n=10, k=2, seed=seed)
            assert local_optima_exhaustive(cfg).count == brute_force_optima_count(cfg)

    def test_space_too_large(self):
        with pytest.raises(MetricError) as err:
            local_optima_exhaustive(NKConfig(n=21, k=1, seed=0))
        assert err.value.code == "SPACE_TOO_LARGE"

    def test_sampled_no_neighbors_all_optima(self):
        cells = lhs_sample(12, 31)
        genotypes = [encode(c) for c in cells]
        # keep only records pairwise farther than Hamming-1 apart
        kept, kept_g = [], []
        for g in genotypes:
            if all(hamming(g, other) > 1 for other in kept_g):
                kept_g.append(g)
                kept.append(g)
        src = SourceId("s", "TABULAR")
        records = [
            EvalRecord(f"m{i}", src, 4, 0.1 + 0.05 * i, genotype=g)
            for i, g in enumerate(kept)
        ]
        table = FitnessTable(records)
        result = local_optima_sampled(table, "s", 4)
        assert result.estimate
        assert result.count == len(kept)

    def test_sampled_dominated_neighbor_excluded(self):
        cells = lhs_sample(30, 77)
        base = None
        neighbor = None
        for cell in cells:
            g = encode(cell)
            from fitscape.cellspace import neighbors

            nbrs = neighbors(g, "VALID")
            if nbrs:
                base, neighbor = g, nbrs[0]
                break
        assert base is not None
        src = SourceId("s", "TABULAR")
        table = FitnessTable(
            [
                EvalRecord("low", src, 4, 0.2, genotype=base),
                EvalRecord("high", src, 4, 0.9, genotype=neighbor),
            ]
        )
        result = local_optima_sampled(table, "s", 4)
        assert result.ids == ("high",)

    def test_empty_rejected(self):
        with pytest.raises(MetricError):
            local_optima_sampled(FitnessTable([]), "s", 4)
