"""Report model, lossless JSON, csv and markdown rendering rules."""
from __future__ import annotations

from fractions import Fraction

import pytest

from wordbias import AuditReport, ReportRow, emit_report, from_json, to_json
from wordbias.report import to_csv, to_markdown


def row(**kw) -> ReportRow:
    base = dict(space="sp", test="weat7", metric="W", value=0.41,
                p_value=0.3, significant=False,
                coverage={"t1": Fraction(7, 8), "t2": Fraction(1)},
                flags=(), note="")
    base.update(kw)
    return ReportRow(**base)


def report(*rows) -> AuditReport:
    return AuditReport(rows=tuple(rows), created_at="2024-01-01T00:00:00+00:00",
                       config_echo={"seed": 0})


class TestJsonRoundTrip:
    def test_lossless(self):
        rep = report(
            row(),
            row(metric="ECT", value=None, p_value=None, significant=None,
                flags=("undefined",), note="constant similarity profile"),
            row(test="sts", metric="STS", value=0.42, p_value=None,
                significant=None, coverage={}),
        )
        again = from_json(to_json(rep))
        assert again == rep

    def test_null_for_undefined(self):
        rep = report(row(metric="ECT", value=None, p_value=None,
                         significant=None))
        text = to_json(rep)
        assert '"value": null' in text

    def test_coverage_as_exact_fraction(self):
        text = to_json(report(row()))
        assert '"t1": "7/8"' in text
        again = from_json(text)
        assert again.rows[0].coverage["t1"] == Fraction(7, 8)


class TestCsv:
    def test_na_rendering(self):
        text = to_csv(report(row(metric="ECT", value=None, p_value=None,
                                 significant=None)))
        line = text.splitlines()[1]
        assert line.startswith("sp,weat7,ECT,n/a,n/a,n/a")

    def test_header_and_values(self):
        text = to_csv(report(row()))
        lines = text.splitlines()
        assert lines[0] == ("space,test,metric,value,p_value,significant,"
                            "coverage,flags,note")
        assert "0.41" in lines[1]
        assert "false" in lines[1]


class TestMarkdown:
    def test_insignificant_w_starred(self):
        text = to_markdown(report(row(value=0.41, p_value=0.3,
                                      significant=False)))
        assert "0.41*" in text

    def test_significant_w_not_starred(self):
        text = to_markdown(report(row(value=0.85, p_value=0.001,
                                      significant=True)))
        assert "0.85" in text
        assert "0.85*" not in text

    def test_undefined_cell_na(self):
        rep = report(row(metric="ECT", value=None, p_value=None,
                         significant=None, flags=("undefined",)))
        assert "n/a" in to_markdown(rep)

    def test_grid_shape(self):
        rep = report(
            row(test="weat1", value=0.5, significant=True),
            row(test="weat2", value=-0.2, significant=False),
            row(test="weat1", metric="KM", value=0.75, p_value=None,
                significant=None),
        )
        text = to_markdown(rep)
        assert "| metric | weat1 | weat2 |" in text
        assert "| W | 0.50 | -0.20* |" in text
        assert "| KM | 0.75 |  |" in text

    def test_sts_line(self):
        rep = report(row(test="sts", metric="STS", value=0.42, p_value=None,
                         significant=None, coverage={}))
        assert "STS Pearson: 0.42" in to_markdown(rep)

    def test_flags_surfaced(self):
        rep = report(row(flags=("below_coverage",)))
        text = to_markdown(rep)
        assert "below_coverage" in text


class TestEmit:
    def test_dispatch_and_file_output(self, tmp_path):
        rep = report(row())
        out = tmp_path / "rep.json"
        text = emit_report(rep, "json", out)
        assert out.read_text(encoding="utf-8") == text
        assert from_json(text) == rep

    def test_unknown_format(self):
        with pytest.raises(ValueError, match="unknown report format"):
            emit_report(report(row()), "xml")


class TestSelectors:
    def test_select_and_listings(self):
        rep = report(
            row(space="a", test="weat1"),
            row(space="a", test="weat2"),
            row(space="b", test="weat1"),
            row(space="a", test="sts", metric="STS", p_value=None,
                significant=None),
        )
        assert len(rep.select(space="a")) == 3
        assert len(rep.select(test="weat1")) == 2
        assert len(rep.select(space="b", test="weat1", metric="W")) == 1
        assert rep.spaces() == ("a", "b")
        assert rep.tests() == ("weat1", "weat2")
