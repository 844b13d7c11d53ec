import subprocess
import sys
import textwrap

import numpy as np
import pytest

from fitscape.cellspace import encode
from fitscape.errors import EvalMiss, FitscapeError, TableError
from fitscape.fitness import (
    EVAL_CSV_HEADER,
    EvalRecord,
    FitnessTable,
    NKConfig,
    NKSource,
    OnesSource,
    SourceId,
    cohen_kappa,
    load_table,
    nk_enumerate,
    nk_fitness,
    write_table,
)
from fitscape.sampling import lhs_sample


class TestKappa:
    def test_perfect_agreement(self):
        assert cohen_kappa([[7, 0], [0, 9]]) == 1.0

    def test_chance_agreement(self):
        assert cohen_kappa([[25, 25], [25, 25]]) == 0.0

    def test_hand_computed_example(self):
        # p_o = 35/50 = 0.7, p_e = (30*25 + 20*25)/2500 = 0.5 -> kappa 0.4
        assert cohen_kappa([[20, 5], [10, 15]]) == pytest.approx(0.4, abs=1e-12)

    def test_scale_invariance(self):
        base = [[20, 5], [10, 15]]
        k0 = cohen_kappa(base)
        for factor in (2, 3, 17):
            scaled = [[factor * v for v in row] for row in base]
            assert cohen_kappa(scaled) == pytest.approx(k0, abs=1e-12)

    def test_degenerate_single_class(self):
        with pytest.raises(FitscapeError) as err:
            cohen_kappa([[5, 0], [0, 0]])
        assert err.value.code == "DEGENERATE"

    def test_kappa_bounded_and_one_iff_diagonal(self):
        rng = np.random.default_rng(123)
        for _ in range(200):
            c = int(rng.integers(2, 6))
            m = rng.integers(0, 20, size=(c, c))
            if m.sum() == 0:
                continue
            try:
                k = cohen_kappa(m)
            except FitscapeError:
                continue
            assert k <= 1.0 + 1e-12
            off_diagonal = m.sum() - np.trace(m)
            assert (k == 1.0) == (off_diagonal == 0)

    def test_rejects_bad_shapes(self):
        for bad in ([[1, 2, 3]], [[1]], [[-1, 0], [0, 1]], [[0, 0], [0, 0]]):
            with pytest.raises(FitscapeError):
                cohen_kappa(bad)


class TestNk:
    def test_deterministic(self):
        cfg = NKConfig(n=12, k=3, seed=9)
        x = 0b101100111000
        assert nk_fitness(cfg, x) == nk_fitness(cfg, x)

    def test_sequence_and_int_agree(self):
        cfg = NKConfig(n=8, k=1, seed=2)
        bits = [1, 0, 1, 1, 0, 0, 1, 0]
        as_int = sum(b << t for t, b in enumerate(bits))
        assert nk_fitness(cfg, bits) == nk_fitness(cfg, as_int)

    def test_length_mismatch(self):
        cfg = NKConfig(n=8, k=1, seed=2)
        with pytest.raises(FitscapeError) as err:
            nk_fitness(cfg, [0, 1])
        assert err.value.code == "LENGTH_MISMATCH"
        with pytest.raises(FitscapeError):
            nk_fitness(cfg, 1 << 8)

    def test_values_in_unit_interval(self):
        cfg = NKConfig(n=10, k=2, seed=4)
        arr = nk_enumerate(cfg)
        assert arr.min() >= 0.0 and arr.max() <= 1.0

    def test_enumeration_matches_brute_force_oracle(self):
        # Independent re-implementation straight from the definition,
        # including its own copy of the splitmix64 constants.
        mask64 = (1 << 64) - 1

        def sm64(v):
            v = (v + 0x9E3779B97F4A7C15) & mask64
            z = v
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask64
            return z ^ (z >> 31)

        def oracle(n, k, seed, x):
            total = 0.0
            for i in range(n):
                pattern = 0
                for t in range(k + 1):
                    pattern |= ((x >> ((i + t) % n)) & 1) << t
                total += sm64(sm64(sm64(seed) ^ i) ^ pattern) / 2.0**64
            return total / n

        cfg = NKConfig(n=10, k=2, seed=31337)
        arr = nk_enumerate(cfg)
        for x in range(1 << 10):
            assert arr[x] == oracle(10, 2, 31337, x)
            assert nk_fitness(cfg, x) == pytest.approx(arr[x], abs=1e-15)

    def test_cross_process_determinism(self):
        cfg = NKConfig(n=16, k=4, seed=77)
        local = repr([nk_fitness(cfg, x) for x in (0, 1, 54321, 65535)])
        script = textwrap.dedent(
            """
            from fitscape.fitness import NKConfig, nk_fitness
            cfg = NKConfig(n=16, k=4, seed=77)
            print(repr([nk_fitness(cfg, x) for x in (0, 1, 54321, 65535)]))
            """
        )
        out = subprocess.run(
            [sys.executable, "-c", script], capture_output=True, text=True, check=True
        )
        assert out.stdout.strip() == local

    def test_bad_config_rejected(self):
        with pytest.raises(ValueError):
            NKConfig(n=5, k=5, seed=1)
        with pytest.raises(ValueError):
            NKConfig(n=0, k=0, seed=1)


@pytest.fixture()
def small_cells():
    return lhs_sample(6, 4242)


def write_rows(path, rows):
    lines = [",".join(EVAL_CSV_HEADER)] + rows
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TestTable:
    def test_load_well_formed(self, tmp_path, small_cells):
        g = [encode(c).to_hex() for c in small_cells]
        path = tmp_path / "evals.csv"
        write_rows(
            path,
            [
                f"m0,{g[0]},s1,4,0.5,0.4",
                f"m1,{g[1]},s1,4,0.6,",
                f"m2,{g[2]},s1,4,0.7,0.65",
            ],
        )
        table = load_table(path)
        assert len(table) == 3
        assert table.query("m1", "s1", 4) == 0.6

    def test_duplicate_key_reports_both_lines(self, tmp_path, small_cells):
        g = encode(small_cells[0]).to_hex()
        path = tmp_path / "evals.csv"
        write_rows(path, [f"m0,{g},s1,4,0.5,", f"m0,{g},s1,4,0.6,"])
        with pytest.raises(TableError) as err:
            load_table(path)
        assert err.value.code == "DUPLICATE_KEY"
        problem = err.value.detail["problems"][0]
        assert problem["line"] == 3 and problem["first_line"] == 2

    def test_malformed_rows_list_line_numbers(self, tmp_path, small_cells):
        g = encode(small_cells[0]).to_hex()
        path = tmp_path / "evals.csv"
        write_rows(
            path,
            [
                f"m0,{g},s1,4,0.5,",
                "m1,nothex,s1,4,0.5,",
                f"m2,{g[:-2]},s1,4,0.5,",
                f"m3,{g},s1,notint,0.5,",
                f"m4,{g},s1,4,1.5,",
            ],
        )
        with pytest.raises(TableError) as err:
            load_table(path)
        lines = {p["line"] for p in err.value.detail["problems"]}
        assert lines == {3, 4, 5, 6}

    def test_per_source_counts_100_88_75(self, tmp_path):
        # the same models measured on three sources, with attrition: the
        # table reports 100, 88 and 75 usable rows respectively
        hexes = [encode(c).to_hex() for c in lhs_sample(100, 1234)]
        rows = []
        for idx, h in enumerate(hexes):
            rows.append(f"m{idx:03d},{h},s1,4,0.5,")
        for idx, h in enumerate(hexes[:88]):
            rows.append(f"m{idx:03d},{h},s2,4,0.6,")
        for idx, h in enumerate(hexes[:75]):
            rows.append(f"m{idx:03d},{h},s1+s2,4,0.55,")
        path = tmp_path / "evals.csv"
        write_rows(path, rows)
        table = load_table(path)
        assert table.per_source_counts() == {"s1": 100, "s2": 88, "s1+s2": 75}
        assert len(table) == 263

    def test_query_by_genotype_matches_model_id(self, tmp_path, small_cells):
        g = encode(small_cells[0])
        path = tmp_path / "evals.csv"
        write_rows(path, [f"m0,{g.to_hex()},s1,4,0.77,"])
        table = load_table(path)
        assert table.query(g, "s1", 4) == table.query("m0", "s1", 4) == 0.77

    def test_eval_miss_on_unknown_budget(self, tmp_path, small_cells):
        g = encode(small_cells[0]).to_hex()
        path = tmp_path / "evals.csv"
        write_rows(path, [f"m0,{g},s1,4,0.77,"])
        table = load_table(path)
        with pytest.raises(EvalMiss):
            table.query("m0", "s1", 12)

    def test_write_load_round_trip_byte_identical(self, tmp_path, small_cells):
        src = SourceId("s1", "TABULAR")
        records = [
            EvalRecord(f"m{i}", src, b, 0.1 * i + 0.01 * b, genotype=encode(c))
            for i, c in enumerate(small_cells)
            for b in (4, 36)
        ]
        table = FitnessTable(records)
        first = tmp_path / "a.csv"
        write_table(table, first)
        second = tmp_path / "b.csv"
        write_table(load_table(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_missing_file(self, tmp_path):
        with pytest.raises(TableError):
            load_table(tmp_path / "nope.csv")


class TestSources:
    def test_ones_source(self, small_cells):
        src = OnesSource(SourceId("ones", "ONES"))
        g = encode(small_cells[0])
        assert src.evaluate(g, 4) == g.popcount / 289

    def test_nk_source_budget_stride(self, small_cells):
        g = encode(small_cells[0])
        static = NKSource(SourceId("nk", "NK"), k=2, seed=5, budgets=(4, 36))
        strided = NKSource(
            SourceId("nk", "NK"), k=2, seed=5, budget_seed_stride=1, budgets=(4, 36)
        )
        assert static.evaluate(g, 4) == static.evaluate(g, 36)
        assert strided.evaluate(g, 4) != strided.evaluate(g, 36)
        assert strided.evaluate(g, 4) == static.evaluate(g, 4)

    def test_source_id_validation(self):
        with pytest.raises(ValueError):
            SourceId("x", "BOGUS")
        with pytest.raises(ValueError):
            SourceId("", "NK")
