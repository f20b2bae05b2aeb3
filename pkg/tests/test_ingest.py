"""CSV ingestion and market-calendar tests."""

import numpy as np
import pytest

import roughvol as rv
from roughvol.ingest import IngestError


class TestComputeM:
    def test_single_session_five_minutes(self):
        cal = rv.MarketCalendar(sessions=(("9:30", "16:00"),), rv_frequency_minutes=5)
        assert rv.compute_m(cal) == 78

    def test_split_session_market(self):
        cal = rv.MarketCalendar(
            sessions=(("9:00", "11:30"), ("12:30", "15:00")), rv_frequency_minutes=5
        )
        assert rv.compute_m(cal) == 60

    def test_long_session_market(self):
        cal = rv.MarketCalendar(sessions=(("8:00", "16:30"),), rv_frequency_minutes=5)
        assert rv.compute_m(cal) == 102

    def test_session_split_invariance(self):
        whole = rv.MarketCalendar(sessions=(("9:30", "16:00"),), rv_frequency_minutes=5)
        split = rv.MarketCalendar(
            sessions=(("9:30", "12:00"), ("12:00", "16:00")), rv_frequency_minutes=5
        )
        assert rv.compute_m(whole) == rv.compute_m(split)

    def test_flooring(self):
        cal = rv.MarketCalendar(sessions=(("9:00", "9:59"),), rv_frequency_minutes=10)
        assert rv.compute_m(cal) == 5

    def test_invalid_sessions(self):
        with pytest.raises(ValueError):
            rv.MarketCalendar(sessions=(("16:00", "9:30"),))
        with pytest.raises(ValueError):
            rv.MarketCalendar(sessions=(("9:00", "12:00"), ("11:00", "15:00")))


class TestReadRvCsv:
    def test_clean_file(self, tmp_path):
        target = tmp_path / "rv.csv"
        target.write_text("date,rv\n2020-01-02,1e-4\n2020-01-03,2e-4\n2020-01-06,1.5e-4\n")
        series, report = rv.read_rv_csv(target, m=78)
        assert len(series) == 3
        assert report.rows_read == 3
        assert report.rows_dropped == 0
        assert report.date_span == ("2020-01-02", "2020-01-06")

    def test_nonpositive_dropped_with_reason(self, tmp_path):
        target = tmp_path / "rv.csv"
        target.write_text("date,rv\n1,1e-4\n2,0\n3,2e-4\n")
        series, report = rv.read_rv_csv(target, m=78)
        assert len(series) == 2
        assert report.reasons["nonpositive"] == 1

    def test_non_numeric_is_parse_error_naming_line(self, tmp_path):
        target = tmp_path / "rv.csv"
        target.write_text("date,rv\n1,1e-4\n2,oops\n")
        with pytest.raises(IngestError, match="line 3"):
            rv.read_rv_csv(target, m=78)

    def test_missing_column(self, tmp_path):
        target = tmp_path / "rv.csv"
        target.write_text("date,vol\n1,1e-4\n")
        with pytest.raises(IngestError, match="no column named 'rv'"):
            rv.read_rv_csv(target, m=78)

    def test_custom_column_names(self, tmp_path):
        target = tmp_path / "rv.csv"
        target.write_text("day,rv5\n1,1e-4\n2,2e-4\n")
        series, _ = rv.read_rv_csv(target, m=78, column="rv5", date_column="day")
        assert len(series) == 2

    def test_all_rows_dropped(self, tmp_path):
        target = tmp_path / "rv.csv"
        target.write_text("date,rv\n1,0\n2,-1\n")
        with pytest.raises(IngestError, match="all 2 rows dropped"):
            rv.read_rv_csv(target, m=78)

    def test_strict_mode_fails_on_gaps(self, tmp_path):
        target = tmp_path / "rv.csv"
        target.write_text("date,rv\n1,1e-4\n2,0\n3,2e-4\n")
        with pytest.raises(IngestError, match="strict"):
            rv.read_rv_csv(target, m=78, strict=True)

    def test_missing_cell_dropped(self, tmp_path):
        target = tmp_path / "rv.csv"
        target.write_text("date,rv\n1,1e-4\n2,\n3,2e-4\n")
        _, report = rv.read_rv_csv(target, m=78)
        assert report.reasons["missing"] == 1

    def test_idempotent_roundtrip(self, tmp_path):
        original = tmp_path / "rv.csv"
        original.write_text(
            "date,rv\n2020-01-02,1.0412416347183462e-4\n2020-01-03,2.73194e-4\n"
        )
        series, report = rv.read_rv_csv(original, m=78)
        canonical = tmp_path / "canonical.csv"
        rv.write_rv_csv(canonical, series, dates=report.kept_dates)
        series2, report2 = rv.read_rv_csv(canonical, m=78)
        assert np.array_equal(series.values, series2.values)
        assert report2.kept_dates == report.kept_dates
        canonical2 = tmp_path / "canonical2.csv"
        rv.write_rv_csv(canonical2, series2, dates=report2.kept_dates)
        assert canonical.read_text() == canonical2.read_text()
