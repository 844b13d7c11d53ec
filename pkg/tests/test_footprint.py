import json

import pytest

from fitscape.errors import FootprintError
from fitscape.fitness import SourceId
from fitscape.footprint import (
    AXES,
    ComparisonReport,
    Footprint,
    Labeled,
    build_footprint,
    compare,
    normalize_for_radar,
    radar_csv,
)
from fitscape.metrics import FitnessStats, LocalOptimaResult, RuggednessResult
from fitscape.persistence import PersistenceSummary


def make_footprint(
    name="s1",
    budget=36,
    mean=0.5,
    std=0.1,
    rho=0.65,
    rho_flag=None,
    optima=5,
    pos=(40.0, 0.5),
    neg=(20.0, 0.3),
    no_walk=False,
) -> Footprint:
    source = SourceId(name, "NK")

    def lab(value, analysis_id):
        return Labeled(value, source, budget, analysis_id)

    if no_walk:
        rugged = None
    else:
        rugged = RuggednessResult(
            rho1=rho,
            tau=(1.0 / rho) if rho_flag is None else None,
            walk_len=101,
            flag=rho_flag,
        )
    return build_footprint(
        lab(FitnessStats(mean, std, 0.0, 1.0, 100), f"stats:{name}:b{budget}"),
        lab(rugged, f"rugged:{name}:b{budget}"),
        lab(LocalOptimaResult(optima, (), True), f"optima:{name}:b{budget}"),
        lab(PersistenceSummary("TOP", 4, budget, pos[1], pos[0], 25.0), f"pos:{name}:b{budget}"),
        lab(PersistenceSummary("BOTTOM", 4, budget, neg[1], neg[0], 25.0), f"neg:{name}:b{budget}"),
    )


class TestBuild:
    def test_eight_slots_filled(self):
        fp = make_footprint()
        assert set(fp.metrics) == set(AXES)
        assert len(AXES) == 8
        assert all(fp.metrics[a] is not None for a in AXES)

    def test_source_mismatch(self):
        a, b = SourceId("a", "NK"), SourceId("b", "NK")
        with pytest.raises(FootprintError) as err:
            build_footprint(
                Labeled(FitnessStats(0.5, 0.1, 0, 1, 5), a, 4, "s"),
                Labeled(RuggednessResult(0.5, 2.0, 10), b, 4, "r"),
                Labeled(LocalOptimaResult(1, (), False), a, 4, "o"),
                Labeled(PersistenceSummary("TOP", 4, 4, 1.0, 100.0, 25.0), a, 4, "p"),
                Labeled(PersistenceSummary("BOTTOM", 4, 4, 1.0, 100.0, 25.0), a, 4, "n"),
            )
        assert err.value.code == "SOURCE_MISMATCH"

    def test_budget_mismatch(self):
        a = SourceId("a", "NK")
        with pytest.raises(FootprintError) as err:
            build_footprint(
                Labeled(FitnessStats(0.5, 0.1, 0, 1, 5), a, 4, "s"),
                Labeled(RuggednessResult(0.5, 2.0, 10), a, 36, "r"),
                Labeled(LocalOptimaResult(1, (), False), a, 4, "o"),
                Labeled(PersistenceSummary("TOP", 4, 4, 1.0, 100.0, 25.0), a, 4, "p"),
                Labeled(PersistenceSummary("BOTTOM", 4, 4, 1.0, 100.0, 25.0), a, 4, "n"),
            )
        assert err.value.code == "BUDGET_MISMATCH"

    def test_report_shape_values_serialized_verbatim(self):
        fp = make_footprint(name="s2", mean=0.94, std=0.03)
        blob = fp.to_json_dict()
        assert blob["metrics"]["mean"] == 0.94
        assert blob["metrics"]["variance"] == 0.03**2

    def test_flags_never_silent(self):
        fp = make_footprint(rho=-0.4, rho_flag="NONPOSITIVE_RHO1")
        assert fp.metrics["tau"] is None
        assert fp.flags["tau"] == "NONPOSITIVE_RHO1"
        fp2 = make_footprint(no_walk=True)
        assert fp2.flags["tau"] == "NO_WALK"
        assert fp2.flags["n_local_optima"] == "ESTIMATE"

    def test_json_round_trip(self):
        fp = make_footprint()
        assert Footprint.from_json_dict(json.loads(json.dumps(fp.to_json_dict()))) == fp


class TestNormalize:
    def test_two_footprints_map_to_ends_or_midpoint(self):
        a = make_footprint("a", mean=0.2, pos=(40.0, 0.5), neg=(20.0, 0.3))
        b = make_footprint("b", mean=0.8, pos=(40.0, 0.5), neg=(20.0, 0.3))
        vectors = normalize_for_radar([a, b])
        mean_axis = AXES.index("mean")
        assert {vectors[0][mean_axis], vectors[1][mean_axis]} == {0.0, 1.0}
        pos_axis = AXES.index("pos_p")
        assert vectors[0][pos_axis] == vectors[1][pos_axis] == 0.5  # equal values

    def test_three_values_linear(self):
        fps = [make_footprint(n, mean=m) for n, m in (("a", 0.1), ("b", 0.2), ("c", 0.3))]
        vectors = normalize_for_radar(fps)
        mean_axis = AXES.index("mean")
        assert [v[mean_axis] for v in vectors] == pytest.approx([0.0, 0.5, 1.0])

    def test_permutation_equivariance(self):
        fps = [make_footprint(n, mean=m, optima=o) for n, m, o in
               (("a", 0.1, 3), ("b", 0.5, 9), ("c", 0.3, 1))]
        base = normalize_for_radar(fps)
        permuted = normalize_for_radar([fps[2], fps[0], fps[1]])
        assert permuted == [base[2], base[0], base[1]]

    def test_affine_invariance(self):
        fps = [make_footprint(n, mean=m) for n, m in (("a", 0.1), ("b", 0.4), ("c", 0.25))]
        scaled = [make_footprint(n, mean=3.0 * m + 1.0) for n, m in (("a", 0.1), ("b", 0.4), ("c", 0.25))]
        mean_axis = AXES.index("mean")
        left = [v[mean_axis] for v in normalize_for_radar(fps)]
        right = [v[mean_axis] for v in normalize_for_radar(scaled)]
        assert left == pytest.approx(right, abs=1e-12)

    def test_flagged_maps_to_zero(self):
        a = make_footprint("a", rho=0.5)
        b = make_footprint("b", rho=-0.2, rho_flag="NONPOSITIVE_RHO1")
        vectors = normalize_for_radar([a, b])
        tau_axis = AXES.index("tau")
        assert vectors[1][tau_axis] == 0.0

    def test_too_few(self):
        with pytest.raises(FootprintError) as err:
            normalize_for_radar([make_footprint()])
        assert err.value.code == "TOO_FEW"

    def test_all_flagged_axis(self):
        a = make_footprint("a", no_walk=True)
        b = make_footprint("b", rho=-0.1, rho_flag="NONPOSITIVE_RHO1")
        with pytest.raises(FootprintError) as err:
            normalize_for_radar([a, b])
        assert err.value.code == "ALL_FLAGGED"


class TestCompare:
    def test_published_mean_ordering(self):
        s1 = make_footprint("s1", mean=0.47, std=0.13)
        s2 = make_footprint("s2", mean=0.94, std=0.03)
        fused = make_footprint("s1+s2", mean=0.89, std=0.05)
        report = compare([s1, s2, fused])
        ranked = [e["source"] for e in report.rankings["mean"]]
        assert ranked == ["s2", "s1+s2", "s1"]

    def test_tied_axis_declared(self):
        a = make_footprint("a", mean=0.5)
        b = make_footprint("b", mean=0.5)
        report = compare([a, b])
        assert all(e.get("tied") for e in report.rankings["mean"])

    def test_report_round_trips_byte_identical(self):
        fps = [make_footprint(n, mean=m) for n, m in (("a", 0.1), ("b", 0.7))]
        report = compare(fps)
        blob = report.to_json()
        parsed = ComparisonReport.from_json_dict(json.loads(blob))
        assert parsed.to_json() == blob

    def test_provenance_carried_through(self):
        fps = [make_footprint(n) for n in ("a", "b")]
        report = compare(fps)
        blob = report.to_json_dict()
        for fp_obj in blob["footprints"]:
            assert any(p.startswith("stats:") for p in fp_obj["provenance"])

    def test_radar_csv_shape(self):
        fps = [make_footprint(n, mean=m) for n, m in (("a", 0.1), ("b", 0.7))]
        lines = radar_csv(compare(fps)).strip().split("\n")
        assert lines[0] == "axis,source,raw,normalized"
        assert len(lines) == 1 + 8 * 2
