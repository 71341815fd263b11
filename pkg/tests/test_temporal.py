import numpy as np
import pytest

from analysis.temporal import (
    PeriodMatrix,
    campaign_cumulative,
    cumulative_by_generation,
    first_occurrence,
    first_occurrence_frame,
    parse_period,
    period_generation_matrix,
    read_matrix,
    stabilization,
)
from core.errors import InvalidConfigError, UnknownGenerationError
from core.events import parse_events
from core.forest import build_forest

HEADER = "sender_id,recipient_id,timestamp\n"


def _forest(text: str):
    return build_forest(parse_events(HEADER + text))


def test_day_fractions_of_table_two(v1_matrix):
    fractions = v1_matrix.column_fractions()
    assert v1_matrix.reach == 639
    assert fractions[0] == pytest.approx(0.1956, abs=5e-4)
    assert fractions[1] == pytest.approx(0.1565, abs=5e-4)


def test_matrix_shape(v1_matrix):
    assert (v1_matrix.G, v1_matrix.T) == (14, 10)
    assert v1_matrix.row_sums()[2] == 47


def test_stabilization_of_table_two(v1_matrix):
    report = stabilization(v1_matrix, window=3)
    assert report.stable_at[1] == 1
    assert report.stable_at[2] == 1
    assert report.stable_at[13] is None or report.stable_at[13] >= 6
    assert report.stable_at[14] == 0
    # generation 12 still grows on day 8
    assert report.stable_at[12] is None
    assert report.stable_prefix() == 2


def test_wider_window_never_stabilizes_earlier(v1_matrix):
    narrow = stabilization(v1_matrix, window=2)
    wide = stabilization(v1_matrix, window=4)
    for g, at in wide.stable_at.items():
        if at is not None:
            assert narrow.stable_at[g] is not None
            assert narrow.stable_at[g] <= at


def test_quiet_window_must_follow_first_activity():
    matrix = PeriodMatrix(np.array([[0, 0, 4, 0, 0, 0, 0]]), 86400.0, 0.0, 4.0)
    assert stabilization(matrix, window=3).stable_at[1] == 3


def test_activity_at_the_end_is_not_stable():
    matrix = PeriodMatrix(np.array([[2, 0, 0, 0, 1]]), 86400.0, 0.0, 3.0)
    assert stabilization(matrix, window=3).stable_at[1] is None


def test_invalid_window(v1_matrix):
    with pytest.raises(InvalidConfigError):
        stabilization(v1_matrix, window=0)


def test_matrix_from_forest_periods():
    forest = _forest(",A,0\nA,B,100\nA,C,86400\nB,D,90000\nC,E,200000\n")
    matrix = period_generation_matrix(forest, 86400)
    assert matrix.counts.tolist() == [[1, 0, 0], [1, 1, 0], [0, 1, 1]]
    assert matrix.reach == 5
    assert np.array_equal(matrix.row_sums(), [1, 2, 2])


def test_short_campaign_with_long_period_has_one_column():
    forest = _forest(",A,0\nA,B,600\nB,C,1800\n")
    matrix = period_generation_matrix(forest, parse_period("1h"))
    assert matrix.T == 1
    assert matrix.column_fractions().tolist() == [1.0]


def test_periods_start_at_first_infection():
    forest = _forest(",A,1000\nA,B,4599\nA,C,4600\n")
    assert period_generation_matrix(forest, 3600).counts.tolist() == [[1, 0], [1, 1]]


def test_cumulative_curves(v1_matrix):
    curves = cumulative_by_generation(v1_matrix, [4, 1])
    assert list(curves) == [1, 4]
    assert curves[4].tolist() == [40, 65, 78, 86, 86, 86, 89, 89, 91, 91]
    with pytest.raises(UnknownGenerationError):
        cumulative_by_generation(v1_matrix, [15])


def test_first_occurrence_offsets():
    forest = _forest(",A,100\nA,B,160\nB,C,400\n,X,130\nX,Y,150\n")
    assert first_occurrence(forest).tolist() == [0.0, 50.0, 300.0]
    frame = first_occurrence_frame(first_occurrence(forest))
    assert frame["offset"].tolist() == ["0:00:00", "0:00:50", "0:05:00"]


def test_first_occurrence_is_non_decreasing(v1_events):
    offsets = first_occurrence(build_forest(v1_events))
    assert np.all(np.diff(offsets) >= 0)


def test_coarsen_merges_adjacent_periods(v1_matrix):
    merged = v1_matrix.coarsen(3)
    assert merged.T == 4
    assert merged.period_len == 3 * 86400.0
    assert np.array_equal(merged.row_sums(), v1_matrix.row_sums())
    assert merged.counts[3].tolist() == [78, 8, 5, 0]


@pytest.mark.parametrize("text,seconds", [("1d", 86400), ("6h", 21600), ("30m", 1800), ("45s", 45),
                                          ("3600", 3600), ("2w", 1209600), ("1.5h", 5400)])
def test_parse_period(text, seconds):
    assert parse_period(text) == seconds


@pytest.mark.parametrize("text", ["", "day", "0", "-1d", "1y"])
def test_parse_period_rejects(text):
    with pytest.raises(InvalidConfigError):
        parse_period(text)


def test_matrix_frame_has_pct_row(v1_matrix, tmp_path):
    frame = v1_matrix.to_frame()
    assert frame.iloc[-1]["generation"] == "pct"
    assert frame.iloc[-1]["p1"] == "0.1956"
    path = tmp_path / "matrix.csv"
    path.write_text(frame.to_csv(index=False), encoding="utf-8")
    again = read_matrix(path)
    assert np.array_equal(again.counts, v1_matrix.counts)
    assert again.reach == 639


def test_matrix_with_percent_footer(write_csv):
    path = write_csv("m.csv", "generation,p1,p2\n1,1,0\n2,2,1\npct,40.00%,10.00%\n".replace("%", ""))
    assert read_matrix(path).reach == 8


def test_matrix_without_footer_uses_total(write_csv):
    path = write_csv("m.csv", "generation,p1,p2\n1,1,0\n2,2,1\n")
    assert read_matrix(path).reach == 4


def test_campaign_cumulative_of_table_two(v1_matrix):
    frame = campaign_cumulative(v1_matrix)
    assert frame["new"].tolist()[:3] == ["125", "100", "48"]
    assert frame["cumulative"].tolist()[:3] == ["125", "225", "273"]
    assert frame["cumulative"].iloc[-1] == "421"
    assert frame["fraction"].tolist()[0] == "0.1956"
    assert frame["fraction"].iloc[-1] == "0.6588"


def test_campaign_cumulative_from_forest_reaches_everyone():
    forest = _forest(",A,0\nA,B,100\nA,C,86400\nB,D,90000\nC,E,200000\n")
    frame = campaign_cumulative(period_generation_matrix(forest, 86400))
    assert frame["cumulative"].tolist() == ["2", "4", "5"]
    assert frame["fraction"].tolist() == ["0.4000", "0.8000", "1.0000"]
