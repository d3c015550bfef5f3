import numpy as np
import pytest

from sobnn import ChartError, Series, render_chart


def _line():
    xs = [0.0, 1.0, 2.0, 3.0]
    return Series(xs, [1.0, 0.5, 0.25, 0.125], label="decay")


def test_output_is_deterministic_and_wellformed():
    a = render_chart([_line()], title="t", xlabel="x", ylabel="y")
    b = render_chart([_line()], title="t", xlabel="x", ylabel="y")
    assert a == b
    assert a.startswith("<svg ")
    assert a.rstrip().endswith("</svg>")
    assert a.count("<svg") == a.count("</svg>") == 1
    assert "<polyline" in a and "decay" in a


def test_labels_are_escaped():
    s = Series([0.0, 1.0], [0.0, 1.0], label="a<b & c>d")
    out = render_chart([s], title="x<y", xlabel="p&q")
    assert "a&lt;b &amp; c&gt;d" in out
    assert "x&lt;y" in out and "p&amp;q" in out
    assert "a<b" not in out


def test_points_mode_draws_circles_not_lines():
    s = Series([3.0, 1.0, 2.0], [0.1, 0.2, 0.3], points=True)
    out = render_chart([s])
    assert out.count("<circle") == 3
    assert "<polyline" not in out


def test_band_polygon_wraps_the_series():
    xs = [0.0, 1.0, 2.0]
    ys = [1.0, 2.0, 3.0]
    band = ([0.5, 1.5, 2.5], [1.5, 2.5, 3.5])
    out = render_chart([Series(xs, ys, band=band)])
    assert out.count("<polygon") == 1
    poly = next(line for line in out.splitlines() if "<polygon" in line)
    # hi edge forward plus lo edge reversed: twice the x count
    assert poly.count(",") == 2 * len(xs)
    assert 'fill-opacity="0.18"' in poly


def test_log_axis_and_its_failure_modes():
    out = render_chart([_line()], logy=True)
    # decade ticks 0.125..1 -> 1 appears as a gridline label
    assert ">1</text>" in out
    with pytest.raises(ChartError):
        render_chart([Series([0.0, 1.0], [0.0, 1.0])], logy=True)
    with pytest.raises(ChartError):
        render_chart([Series([0.0, 1.0], [-1.0, 1.0])], logy=True)


def test_rejects_empty_and_nonfinite_input():
    with pytest.raises(ChartError):
        render_chart([])
    with pytest.raises(ChartError):
        render_chart([Series([], [])])
    with pytest.raises(ChartError):
        render_chart([Series([0.0, 1.0], [0.0, np.nan])])
    with pytest.raises(ChartError):
        render_chart([Series([0.0, np.inf], [0.0, 1.0])])
    band = ([0.0, np.nan], [1.0, 1.0])
    with pytest.raises(ChartError):
        render_chart([Series([0.0, 1.0], [0.5, 0.5], band=band)])


def test_no_negative_zero_coordinates():
    # tiny negative values round to "-0.00" unless normalized
    s = Series([0.0, 1.0], [-1e-9, 1.0])
    out = render_chart([s], width=100, height=100)
    assert "-0.00" not in out


def test_degenerate_ranges_still_render():
    flat = render_chart([Series([2.0, 2.0], [5.0, 5.0])])
    assert "<polyline" in flat
    single = render_chart([Series([1.0], [1.0], points=True)])
    assert "<circle" in single


def test_multiple_series_cycle_colors():
    many = [Series([0.0, 1.0], [float(i), float(i + 1)], label=f"s{i}") for i in range(5)]
    out = render_chart(many)
    assert out.count("<polyline") == 5
    # palette has four entries, so the fifth series reuses the first color
    assert out.count('stroke="#1f6fb4" stroke-width="1.5"') == 2


def test_size_parameters_respected():
    out = render_chart([_line()], width=400, height=300)
    assert 'width="400"' in out and 'height="300"' in out
    assert 'viewBox="0 0 400 300"' in out
