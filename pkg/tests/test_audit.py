"""Audit runner: orchestration, degradation, series comparison."""
from __future__ import annotations

import json

import numpy as np
import pytest

from wordbias import (AuditConfig, AuditError, NormalizationPolicy, ScoreSeries,
                      SpaceConfig, avg_vs_conc, km_accuracy, load_specs, resolve,
                      run_audit, series_correlation, stable_seed, to_json, weat,
                      write_spec_file, write_text_format)
from wordbias.specs import BiasSpecification, SpecFile

from conftest import space_of

IDENTITY = NormalizationPolicy.identity()


def small_spec(spec_id="mini", kind="explicit") -> BiasSpecification:
    attrs = {} if kind == "implicit" else dict(a1=("p0", "p1"), a2=("q0", "q1"))
    return BiasSpecification(
        id=spec_id, kind=kind, bias_type="test", lang="en",
        t1=("u0", "u1", "u2"), t2=("v0", "v1", "v2"), **attrs)


def spec_terms(spec):
    return [t for label in ("t1", "t2", "a1", "a2") for t in spec.terms(label)]


def write_fixture_space(tmp_path, name="fix", seed=3, missing=()):
    spec = small_spec()
    tokens = [t for t in spec_terms(spec) if t not in missing]
    vecs = np.random.default_rng(seed).normal(size=(len(tokens), 4))
    space = space_of(tokens, vecs, name=name)
    path = tmp_path / f"{name}.vec"
    write_text_format(space, path)
    return path, space


def write_config(tmp_path, spaces, spec_file, **overrides):
    cfg = {
        "spaces": spaces,
        "spec_files": [str(spec_file)],
        "permutations": 200,
        "km_runs": 2,
        "seed": 7,
        "policy": NormalizationPolicy.identity().to_dict(),
    }
    cfg.update(overrides)
    p = tmp_path / "config.json"
    p.write_text(json.dumps(cfg), encoding="utf-8")
    return p


@pytest.fixture
def spec_path(tmp_path):
    p = tmp_path / "specs.json"
    write_spec_file(SpecFile(version=1, specs=(small_spec(),)), p)
    return p


class TestRunAudit:
    def test_four_rows_per_explicit_spec(self, tmp_path, spec_path):
        path, _ = write_fixture_space(tmp_path)
        cfg = AuditConfig.from_file(write_config(
            tmp_path, [{"name": "fix", "path": str(path)}], spec_path,
            metrics=["W", "ECT", "BAT", "KM"]))
        report = run_audit(cfg)
        assert len(report.rows) == 4
        assert [r.metric for r in report.rows] == ["W", "ECT", "BAT", "KM"]

    def test_row_completeness_arity(self, tmp_path, spec_path):
        specs = SpecFile(version=1, specs=(
            small_spec("s1"), small_spec("s2"), small_spec("s3"),
            small_spec("s4")))
        sp = tmp_path / "four.json"
        write_spec_file(specs, sp)
        spaces = []
        for i in range(6):
            p, _ = write_fixture_space(tmp_path, name=f"sp{i}", seed=i)
            spaces.append({"name": f"sp{i}", "path": str(p)})
        cfg = AuditConfig.from_file(write_config(
            tmp_path, spaces, sp, metrics=["W", "ECT", "BAT", "KM"],
            permutations=50, km_runs=1))
        report = run_audit(cfg)
        assert len(report.rows) == 96
        combos = {(r.space, r.test, r.metric) for r in report.rows}
        assert len(combos) == 96

    def test_w_row_matches_metrics_module(self, tmp_path, spec_path):
        path, space = write_fixture_space(tmp_path)
        cfg = AuditConfig.from_file(write_config(
            tmp_path, [{"name": "fix", "path": str(path)}], spec_path))
        report = run_audit(cfg)
        w_row = report.select(metric="W")[0]
        rs = resolve(small_spec(), space, IDENTITY, cfg.min_coverage)
        expected = weat(rs, max_permutations=200,
                        seed=stable_seed(7, "fix", "mini", "perm"))
        assert w_row.value == expected.effect_size
        assert w_row.p_value == expected.p_value
        km_row = report.select(metric="KM")[0]
        expected_km = km_accuracy(rs, runs=2,
                                  base_seed=stable_seed(7, "fix", "mini", "km"))
        assert km_row.value == expected_km.value

    def test_load_failure_degrades_per_space(self, tmp_path, spec_path):
        good, _ = write_fixture_space(tmp_path, name="good")
        cfg = AuditConfig.from_file(write_config(
            tmp_path,
            [{"name": "bad", "path": str(tmp_path / "missing.vec")},
             {"name": "good", "path": str(good)}],
            spec_path, metrics=["W", "KM"]))
        report = run_audit(cfg)
        assert report.config_echo["load_failures"] == ["bad"]
        bad_rows = report.select(space="bad")
        assert len(bad_rows) == 2
        assert all("load_error" in r.flags and r.value is None for r in bad_rows)
        good_rows = report.select(space="good")
        assert all(r.value is not None for r in good_rows)

    def test_resolution_failure_degrades_per_spec(self, tmp_path):
        specs = SpecFile(version=1, specs=(
            small_spec("ok"),
            BiasSpecification(id="gone", kind="explicit", bias_type="t",
                              lang="en", t1=("zz1",), t2=("zz2",),
                              a1=("zz3",), a2=("zz4",))))
        sp = tmp_path / "mixed.json"
        write_spec_file(specs, sp)
        path, _ = write_fixture_space(tmp_path)
        cfg = AuditConfig.from_file(write_config(
            tmp_path, [{"name": "fix", "path": str(path)}], sp,
            metrics=["W", "KM"]))
        report = run_audit(cfg)
        gone = report.select(test="gone")
        assert len(gone) == 2
        assert all("resolution_error" in r.flags for r in gone)
        assert all(r.value is not None for r in report.select(test="ok"))

    def test_implicit_spec_flags_explicit_metrics(self, tmp_path):
        specs = SpecFile(version=1, specs=(small_spec("imp", kind="implicit"),))
        sp = tmp_path / "imp.json"
        write_spec_file(specs, sp)
        path, _ = write_fixture_space(tmp_path)
        cfg = AuditConfig.from_file(write_config(
            tmp_path, [{"name": "fix", "path": str(path)}], sp,
            metrics=["W", "ECT", "BAT", "KM"]))
        report = run_audit(cfg)
        for metric in ("W", "ECT", "BAT"):
            r = report.select(metric=metric)[0]
            assert "not_applicable" in r.flags
            assert r.value is None
        assert report.select(metric="KM")[0].value is not None

    def test_below_coverage_evaluated_and_flagged(self, tmp_path, spec_path):
        # drop 2 of 3 t1 terms: coverage 1/3 < 0.5
        path, _ = write_fixture_space(tmp_path, missing=("u1", "u2"))
        cfg = AuditConfig.from_file(write_config(
            tmp_path, [{"name": "fix", "path": str(path)}], spec_path,
            metrics=["KM"], min_coverage=0.5))
        report = run_audit(cfg)
        r = report.rows[0]
        assert "below_coverage" in r.flags
        assert "truncated" in r.flags
        assert r.value is not None

    def test_sts_rows(self, tmp_path, spec_path):
        path, _ = write_fixture_space(tmp_path)
        pairs = tmp_path / "pairs.tsv"
        pairs.write_text("4.0\tu0 u1\tu1 u0\n1.0\tu0\tv2\n3.0\tp0 q0\tq1\n",
                         encoding="utf-8")
        cfg = AuditConfig.from_file(write_config(
            tmp_path, [{"name": "fix", "path": str(path)}], spec_path,
            metrics=["KM", "STS"], sts_path=str(pairs)))
        report = run_audit(cfg)
        sts_rows = report.select(test="sts")
        assert len(sts_rows) == 1
        assert sts_rows[0].metric == "STS"
        assert sts_rows[0].value is not None
        # dropping STS from metrics drops the row, pairs file or not
        cfg2 = AuditConfig.from_file(write_config(
            tmp_path, [{"name": "fix", "path": str(path)}], spec_path,
            metrics=["KM"], sts_path=str(pairs)))
        assert run_audit(cfg2).select(test="sts") == ()

    def test_determinism_modulo_timestamp(self, tmp_path, spec_path):
        path, _ = write_fixture_space(tmp_path)
        cfg = AuditConfig.from_file(write_config(
            tmp_path, [{"name": "fix", "path": str(path)}], spec_path))
        a, b = run_audit(cfg), run_audit(cfg)
        assert a.rows == b.rows
        assert a.config_echo == b.config_echo
        ja = json.loads(to_json(a))
        jb = json.loads(to_json(b))
        ja.pop("created_at"), jb.pop("created_at")
        assert ja == jb

    def test_seed_isolation_across_spaces(self, tmp_path, spec_path):
        p1, _ = write_fixture_space(tmp_path, name="one", seed=1)
        p2, _ = write_fixture_space(tmp_path, name="two", seed=2)
        solo = run_audit(AuditConfig.from_file(write_config(
            tmp_path, [{"name": "one", "path": str(p1)}], spec_path)))
        both = run_audit(AuditConfig.from_file(write_config(
            tmp_path, [{"name": "one", "path": str(p1)},
                       {"name": "two", "path": str(p2)}], spec_path)))
        assert solo.select(space="one") == both.select(space="one")


class TestConfig:
    def test_defaults(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text('{"spaces": [{"name": "x", "path": "x.vec"}]}',
                     encoding="utf-8")
        cfg = AuditConfig.from_file(p)
        assert cfg.spec_files == ("bundled:araweat_msa",)
        assert cfg.metrics == ("W", "ECT", "BAT", "KM", "STS")
        assert cfg.min_coverage == 0.2
        assert cfg.alpha == 0.05
        assert cfg.km_runs == 20

    def test_missing_file(self, tmp_path):
        with pytest.raises(AuditError, match="cannot read"):
            AuditConfig.from_file(tmp_path / "nope.json")

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text("{", encoding="utf-8")
        with pytest.raises(AuditError, match="invalid JSON"):
            AuditConfig.from_file(p)

    def test_unknown_metric(self):
        with pytest.raises(AuditError, match="unknown metric"):
            AuditConfig(spaces=(SpaceConfig("x", "x.vec"),),
                        metrics=("W", "XX"))

    def test_duplicate_space_names(self):
        with pytest.raises(AuditError, match="unique"):
            AuditConfig(spaces=(SpaceConfig("x", "a.vec"),
                                SpaceConfig("x", "b.vec")))

    def test_alpha_range(self):
        with pytest.raises(AuditError, match="alpha"):
            AuditConfig(spaces=(SpaceConfig("x", "a.vec"),), alpha=1.5)

    def test_no_spaces(self):
        with pytest.raises(AuditError, match="at least one space"):
            AuditConfig(spaces=())

    def test_bad_space_format(self):
        with pytest.raises(AuditError, match="format"):
            SpaceConfig("x", "a.vec", format="hdf5")

    def test_load_specs_duplicate_across_sources(self, tmp_path):
        sp = tmp_path / "dup.json"
        write_spec_file(SpecFile(version=1, specs=(small_spec("weat7"),)), sp)
        with pytest.raises(AuditError, match="duplicate spec id"):
            load_specs(("bundled:araweat_msa", str(sp)))


class TestSeriesCorrelation:
    def test_identity(self):
        s = ScoreSeries("s", (("a", 1.0), ("b", 2.0), ("c", 4.0)))
        assert series_correlation(s, s) == pytest.approx(1.0, abs=1e-12)

    def test_hand_computed_three_points(self):
        a = ScoreSeries("a", (("k1", 1.0), ("k2", 2.0), ("k3", 3.0)))
        b = ScoreSeries("b", (("k1", 2.0), ("k2", 1.0), ("k3", 6.0)))
        # Pearson((1,2,3), (2,1,6)) = 4 / sqrt(2 * 14)
        assert series_correlation(a, b) == pytest.approx(
            4.0 / np.sqrt(28.0), abs=1e-9)

    def test_symmetry(self):
        a = ScoreSeries("a", (("x", 0.1), ("y", -0.4), ("z", 2.0), ("w", 1.0)))
        b = ScoreSeries("b", (("x", 1.1), ("y", 0.3), ("z", -0.2), ("w", 0.8)))
        assert series_correlation(a, b) == pytest.approx(
            series_correlation(b, a), abs=1e-12)

    def test_affine_transform_of_one_series(self):
        a = ScoreSeries("a", (("x", 0.1), ("y", -0.4), ("z", 2.0)))
        b = ScoreSeries("b", (("x", 1.1), ("y", 0.3), ("z", -0.2)))
        scaled = ScoreSeries("b2", tuple((k, 3.0 * v + 0.5) for k, v in b.values))
        assert series_correlation(a, scaled) == pytest.approx(
            series_correlation(a, b), abs=1e-9)

    def test_undefined_cells_drop_pairwise(self):
        a = ScoreSeries("a", (("x", 1.0), ("y", None), ("z", 2.0), ("w", 4.0)))
        b = ScoreSeries("b", (("x", 2.0), ("y", 9.0), ("z", 4.0), ("w", 8.0)))
        assert series_correlation(a, b) == pytest.approx(1.0, abs=1e-12)

    def test_too_few_values(self):
        a = ScoreSeries("a", (("x", 1.0), ("y", 2.0)))
        b = ScoreSeries("b", (("x", 1.0), ("y", 2.0)))
        with pytest.raises(ValueError, match="at least 3"):
            series_correlation(a, b)

    def test_constant_series(self):
        a = ScoreSeries("a", (("x", 1.0), ("y", 1.0), ("z", 1.0)))
        b = ScoreSeries("b", (("x", 1.0), ("y", 2.0), ("z", 3.0)))
        with pytest.raises(ValueError, match="constant"):
            series_correlation(a, b)

    def test_duplicate_keys_rejected(self):
        with pytest.raises(ValueError, match="unique"):
            ScoreSeries("s", (("a", 1.0), ("a", 2.0)))


def toy_report(cells, name="conc"):
    from wordbias import AuditReport, ReportRow
    rows = tuple(ReportRow(space=name, test=t, metric=m, value=v)
                 for (t, m), v in cells.items())
    return AuditReport(rows=rows, created_at="t", config_echo={})


class TestAvgVsConc:
    def test_identical_reports_correlate_perfectly(self):
        cells = {("t1", "W"): 0.5, ("t1", "KM"): 0.9, ("t2", "W"): -0.3,
                 ("t2", "KM"): 0.6}
        conc = toy_report(cells)
        avg, conc_s, r = avg_vs_conc([toy_report(cells, "sub")], conc)
        assert r == pytest.approx(1.0, abs=1e-12)
        assert [k for k, _ in avg.values] == ["t1/W", "t1/KM", "t2/W", "t2/KM"]

    def test_cell_average(self):
        conc = toy_report({("t1", "W"): 0.4, ("t2", "W"): 1.0,
                           ("t3", "W"): 0.1})
        sub_a = toy_report({("t1", "W"): 0.2, ("t2", "W"): 0.8,
                            ("t3", "W"): 0.3}, "a")
        sub_b = toy_report({("t1", "W"): 0.6, ("t2", "W"): 1.2,
                            ("t3", "W"): 0.1}, "b")
        avg, _, _ = avg_vs_conc([sub_a, sub_b], conc, metrics=("W",))
        assert dict(avg.values)["t1/W"] == pytest.approx(0.4, abs=1e-12)

    def test_magnitude_metrics(self):
        cells = {("t1", "W"): -0.5, ("t2", "W"): 0.3, ("t3", "W"): -0.1}
        avg, conc_s, _ = avg_vs_conc([toy_report(cells, "s")], toy_report(cells),
                                     metrics=("W",), magnitude_metrics=("W",))
        assert dict(avg.values)["t1/W"] == 0.5
        assert dict(conc_s.values)["t1/W"] == 0.5

    def test_no_common_cells(self):
        conc = toy_report({("t1", "W"): 0.4})
        with pytest.raises(ValueError, match="no .*cells|share no"):
            avg_vs_conc([toy_report({("t1", "W"): 0.4}, "s")], conc,
                        metrics=("KM",))

    def test_needs_sub_reports(self):
        with pytest.raises(ValueError, match="sub-report"):
            avg_vs_conc([], toy_report({("t1", "W"): 0.4}))


class TestStableSeed:
    def test_deterministic_and_distinct(self):
        assert stable_seed(1, "a", "b") == stable_seed(1, "a", "b")
        assert stable_seed(1, "a", "b") != stable_seed(1, "a", "c")
        assert stable_seed(1, "a", "b") != stable_seed(2, "a", "b")

    def test_non_negative_int(self):
        s = stable_seed("anything", 42)
        assert isinstance(s, int) and s >= 0
