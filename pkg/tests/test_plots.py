import xml.etree.ElementTree as ET

import numpy as np
import pytest

from lifefuse.fusion import TrainingHistory
from lifefuse.plots import fit_chart, line_chart_svg, loss_chart, write_svg

NS = "{http://www.w3.org/2000/svg}"


def _hist(offset=0.0):
    h = TrainingHistory()
    for e in range(1, 6):
        h.append(e, 0.7 / e + offset, 0.75 / e + offset)
    return h


def test_loss_chart_well_formed_and_deterministic():
    svg = loss_chart(_hist(), title="a < b & c")
    root = ET.fromstring(svg)
    assert root.tag == NS + "svg"
    assert len(root.findall(f"{NS}polyline")) == 2
    assert svg == loss_chart(_hist(), title="a < b & c")


def test_comparison_chart_one_line_per_variant():
    svg = loss_chart({"layer3": _hist(), "layer5": _hist(0.1)}, which="test")
    labels = [t.text for t in ET.fromstring(svg).iter(f"{NS}text")]
    assert "layer3 test" in labels and "layer5 test" in labels
    assert len(ET.fromstring(svg).findall(f"{NS}polyline")) == 2


def test_truth_drawn_as_steps():
    root = ET.fromstring(fit_chart(np.arange(4), [0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]))
    pred, truth = root.findall(f"{NS}polyline")
    assert len(pred.get("points").split()) == 4
    assert len(truth.get("points").split()) == 7


def test_nan_points_skipped(tmp_path):
    svg = line_chart_svg({"x": ([1, 2, 3], [1.0, float("nan"), 2.0])})
    assert len(ET.fromstring(svg).find(f"{NS}polyline").get("points").split()) == 2
    path = write_svg(tmp_path / "c.svg", svg)
    assert ET.parse(path).getroot().tag == NS + "svg"


def test_empty_series():
    with pytest.raises(ValueError):
        line_chart_svg({})
