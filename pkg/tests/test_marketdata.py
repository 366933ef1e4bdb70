import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lstmcast.errors import BadHeaderError, BadRowError, EmptyDatasetError, MissingFileError, MixedSymbolsError
from lstmcast.marketdata import (
    DUPLICATE_DATE,
    NEGATIVE_VOLUME,
    OhlcvRow,
    SectorRegistry,
    TimeSeriesFrame,
    clean,
    column_stats,
    parse_csv,
    sector_of,
    summary_stats,
    write_csv,
    write_rejections,
)
from lstmcast.synthetic import bundled

from conftest import GTB_2000_ROWS, GTB_ROWS


def test_parse_first_gtb_row(write_csv):
    frame = parse_csv(write_csv(GTB_ROWS))
    assert frame.symbol == "GTB"
    assert frame.rows[0] == OhlcvRow(dt.date(2001, 1, 2), "GTB", 4.17, 4.17, 4.1, 4.17, 1321000)
    assert len(frame) == 18


def test_parse_dayfirst_dates(write_csv):
    frame = parse_csv(write_csv(GTB_2000_ROWS))
    first = frame.rows[0]
    assert first.date == dt.date(2000, 5, 4)
    assert (first.open, first.close, first.low, first.high, first.volume) == (2.26, 2.30, 2.266, 2.30, 200200)
    # 03/01/2001 follows 02/01/2001 as the next trading day only when read day-first
    assert [r.date for r in parse_csv(write_csv(GTB_ROWS)).rows[:2]] == [dt.date(2001, 1, 2), dt.date(2001, 1, 3)]


def test_parse_sorts_and_accepts_iso(write_csv):
    frame = parse_csv(write_csv("2001-01-05,GTB,1,1,1,1,5\n02/01/2001,GTB,2,2,2,2,3\n"))
    assert [r.date.day for r in frame.rows] == [2, 5]


def test_header_is_case_insensitive_and_order_free(write_csv):
    path = write_csv("SYMBOL,Date,open,close,low,high,VOLUME\nGTB,02/01/2001,1,1,1,1,5\n", header=False)
    assert parse_csv(path).rows[0].volume == 5


def test_header_only_is_empty(write_csv):
    with pytest.raises(EmptyDatasetError):
        parse_csv(write_csv(""))


def test_missing_file(tmp_path):
    with pytest.raises(MissingFileError, match="nope.csv"):
        parse_csv(tmp_path / "nope.csv")


def test_bad_header_lists_found_and_expected(write_csv):
    with pytest.raises(BadHeaderError) as info:
        parse_csv(write_csv("date,ticker,open,close\n", header=False))
    assert info.value.found == ["date", "ticker", "open", "close"]
    assert "volume" in info.value.expected


def test_bad_row_reports_line_and_field(write_csv):
    with pytest.raises(BadRowError) as info:
        parse_csv(write_csv("02/01/2001,GTB,4.17,abc,4.1,4.17,100\n"))
    assert (info.value.row_number, info.value.field) == (2, "close")


def test_empty_cells_parse_as_missing(write_csv):
    frame = parse_csv(write_csv("02/01/2001,GTB,4.17,,4.1,4.17,100\n03/01/2001,GTB,1,1,1,1,1\n"))
    assert frame.rows[0].close is None


def test_symbol_filter_and_mixed_files(write_csv):
    path = write_csv("02/01/2001,GTB,1,1,1,1,1\n02/01/2001,ZENITH,2,2,2,2,2\n")
    with pytest.raises(MixedSymbolsError):
        parse_csv(path)
    frame = parse_csv(path, symbol="zenith")
    assert [r.symbol for r in frame.rows] == ["ZENITH"]
    with pytest.raises(EmptyDatasetError):
        parse_csv(path, symbol="UACN")


def test_volume_in_scientific_notation(write_csv):
    frame = parse_csv(write_csv("02/01/2001,GTB,1,1,1,1,-4.210300e+04\n"))
    assert frame.rows[0].volume == -42103


def test_clean_drops_negative_volume(write_csv):
    path = write_csv("02/01/2001,GTB,1,1,1,1,-42103\n03/01/2001,GTB,1,1,1,1,10\n")
    cleaned = clean(parse_csv(path))
    assert len(cleaned) == 1
    assert [(r.line, r.reason) for r in cleaned.rejected] == [(2, NEGATIVE_VOLUME)]


def test_clean_is_identity_on_valid_frame(write_csv):
    frame = parse_csv(write_csv(GTB_ROWS))
    cleaned = clean(frame)
    assert cleaned == frame and cleaned.rejected == ()


def test_clean_duplicate_date_keeps_first(write_csv):
    frame = parse_csv(write_csv("02/01/2001,GTB,1,1,1,1,1\n02/01/2001,GTB,2,2,2,2,2\n"))
    cleaned = clean(frame)
    assert [r.open for r in cleaned.rows] == [1.0]
    assert cleaned.rejected[0].reason == DUPLICATE_DATE and cleaned.rejected[0].line == 3


def test_clean_reasons(write_csv):
    body = ("02/01/2001,GTB,1,,1,1,1\n"
            "03/01/2001,GTB,0,1,1,1,1\n"
            "04/01/2001,GTB,2,2,2.5,2.6,1\n"
            "05/01/2001,GTB,2,2,1.5,2.6,1\n")
    frame = parse_csv(write_csv(body))
    lenient = clean(frame)
    assert [r.reason for r in lenient.rejected] == ["MissingField", "NonPositivePrice"]
    strict = clean(frame, strict=True)
    assert [r.reason for r in strict.rejected] == ["MissingField", "NonPositivePrice", "BracketViolation"]
    assert len(strict) == 1


def test_clean_everything_dirty(write_csv):
    with pytest.raises(EmptyDatasetError):
        clean(parse_csv(write_csv("02/01/2001,GTB,1,1,1,1,-1\n")))


def test_rejection_report(write_csv, tmp_path):
    cleaned = clean(parse_csv(write_csv("02/01/2001,GTB,1,1,1,1,-5\n03/01/2001,GTB,1,1,1,1,5\n")))
    out = tmp_path / "rej.csv"
    write_rejections(cleaned, out)
    assert out.read_text().splitlines() == ["row_number,reason,raw_line",
                                            '2,NegativeVolume,"02/01/2001,GTB,1,1,1,1,-5"']


# -- randomized dirty frames --------------------------------------------------

maybe_price = st.one_of(st.none(), st.floats(-5, 50, allow_nan=False))
dirty_row = st.builds(
    lambda day, o, c, lo, hi, v: OhlcvRow(dt.date(2001, 1, 1) + dt.timedelta(days=day), "GTB", o, c, lo, hi, v),
    st.integers(0, 30), maybe_price, maybe_price, maybe_price, maybe_price,
    st.one_of(st.none(), st.integers(-100, 10**6)),
)


def _frame(rows):
    rows = sorted(rows, key=lambda r: r.date)
    return TimeSeriesFrame("GTB", tuple(rows))


@settings(max_examples=200)
@given(st.lists(dirty_row, min_size=1, max_size=40), st.booleans())
def test_clean_invariants_and_idempotence(rows, strict):
    frame = _frame(rows)
    try:
        once = clean(frame, strict=strict)
    except EmptyDatasetError:
        return
    assert clean(once, strict=strict) == once
    assert len(once) + len(once.rejected) == len(frame)
    dates = [r.date for r in once.rows]
    assert all(a < b for a, b in zip(dates, dates[1:]))
    for r in once.rows:
        assert min(r.open, r.close, r.low, r.high) > 0 and r.volume >= 0
        if strict:
            assert r.low <= min(r.open, r.close) and r.high >= max(r.open, r.close)


@settings(max_examples=100)
@given(st.lists(dirty_row, min_size=1, max_size=30))
def test_write_parse_roundtrip(tmp_path_factory, rows):
    try:
        frame = clean(_frame(rows))
    except EmptyDatasetError:
        return
    frame = TimeSeriesFrame(frame.symbol, frame.rows)
    path = tmp_path_factory.mktemp("rt") / "f.csv"
    write_csv(frame, path)
    assert parse_csv(path) == frame


# -- summary statistics -------------------------------------------------------

def test_column_stats_simple():
    s = column_stats([1, 2, 3, 4, 5])
    assert (s.mean, s.min, s.max, s.q50, s.count) == (3.0, 1.0, 5.0, 3.0, 5)


def test_column_stats_sample_std():
    data = [2, 4, 4, 4, 5, 5, 7, 9]
    mean = sum(data) / len(data)
    oracle = (sum((x - mean) ** 2 for x in data) / (len(data) - 1)) ** 0.5
    assert column_stats(data).std == pytest.approx(oracle, rel=1e-14)
    assert column_stats(data).std == pytest.approx(2.138, abs=5e-4)


def test_single_row_std_is_zero():
    assert column_stats([4.2]).std == 0.0


def test_summary_stats_layout(write_csv):
    stats = summary_stats(parse_csv(write_csv(GTB_2000_ROWS)))
    assert stats["open"].min == 2.26 and stats["open"].max == 2.46
    text = stats.to_text().splitlines()
    assert text[0].split() == ["open", "close", "low", "high", "volume"]
    assert [line.split()[0] for line in text[1:]] == ["count", "mean", "std", "min", "25%", "50%", "75%", "max"]


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=60))
def test_quartiles_monotone(values):
    s = column_stats(values)
    assert s.min <= s.q25 <= s.q50 <= s.q75 <= s.max


def test_quartiles_match_linear_interpolation():
    values = [7.0, 1.0, 3.0, 10.0]
    # sorted 1,3,7,10; 25% position 0.75 -> 1 + 0.75 * 2
    assert column_stats(values).q25 == 2.5


def test_bundled_fixture_is_clean():
    frame = parse_csv(bundled("synthetic_ohlcv.csv"))
    assert len(clean(frame, strict=True)) == 2000


# -- sectors ------------------------------------------------------------------

def test_sector_lookup():
    reg = SectorRegistry.load()
    assert sector_of(reg, "GTB") == "Banking"
    assert sector_of(reg, "ZENITH") == "Banking"
    assert sector_of(reg, "wapco") == "Industrial Goods"
    assert sector_of(reg, "XYZ") is None


def test_registry_has_every_table_row():
    reg = SectorRegistry.load()
    assert len(reg.sectors) == 13
    assert all(len(t) == 2 for t in reg.sectors.values())


def test_registry_rejects_ticker_in_two_sectors():
    with pytest.raises(Exception, match="(?i)gtb.*Banking"):
        SectorRegistry({"Banking": ["GTB"], "Other": ["gtb"]})


def test_registry_from_user_file(tmp_path):
    path = tmp_path / "s.tsv"
    path.write_text("# comment\nTech\tAAA,BBB\n", encoding="utf-8")
    assert sector_of(SectorRegistry.load(path), "bbb") == "Tech"


def test_frame_columns_helper(write_csv):
    frame = parse_csv(write_csv(GTB_2000_ROWS))
    np.testing.assert_array_equal(frame.column("open"), [2.26, 2.35, 2.38, 2.40, 2.46])
    assert frame.columns(["open", "volume"]).shape == (5, 2)
