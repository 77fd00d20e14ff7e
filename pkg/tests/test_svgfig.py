import numpy as np

from heavytail.svgfig import CANVAS_H, CANVAS_W, PALETTE, render_heatmap_svg


def small_grid():
    param = np.array([1.0, 2.0, 3.0])
    s = np.array([0.5, 1.0, 1.5, 2.0])
    z = np.linspace(0.2, 2.0, 12).reshape(3, 4)
    iso = (np.array([[1.0, 0.7], [3.0, 1.9]]),)
    return param, s, z, iso


def test_svg_structure():
    svg = render_heatmap_svg(*small_grid(), param_label="b", s_label="s",
                             title="demo")
    assert svg.startswith("<svg")
    assert svg.rstrip().endswith("</svg>")
    assert f'width="{CANVAS_W}"' in svg and f'height="{CANVAS_H}"' in svg
    assert svg.count("<rect") >= 12  # one cell per grid point + legend
    assert "<polyline" in svg
    assert ">b</text>" in svg and ">s</text>" in svg
    for color in PALETTE:
        assert color in svg


def test_svg_deterministic():
    a = render_heatmap_svg(*small_grid(), param_label="eta", s_label="s")
    b = render_heatmap_svg(*small_grid(), param_label="eta", s_label="s")
    assert a == b


def test_svg_handles_nan_cells():
    param, s, z, iso = small_grid()
    z = z.copy()
    z[1, 2] = np.nan
    svg = render_heatmap_svg(param, s, z, iso, param_label="b", s_label="s")
    assert "#bbbbbb" in svg  # missing cells rendered grey
