import math
import xml.etree.ElementTree as ET

from zsl.plot import line_chart

NS = "{http://www.w3.org/2000/svg}"


def _parse(svg):
    return ET.fromstring(svg)


def test_valid_svg_with_legend():
    root = _parse(line_chart({"a": ([0, 1, 2], [1, 4, 9]), "b <&>": ([0, 1], [2, 2])},
                             title="t & u", xlabel="x", ylabel="y"))
    assert root.tag == NS + "svg"
    assert len(root.findall(NS + "polyline")) == 2
    texts = [t.text for t in root.iter(NS + "text")]
    assert "b <&>" in texts and "t & u" in texts


def test_loglog_drops_nonpositive():
    root = _parse(line_chart({"s": ([1, 10, 0, -1, 100], [1, 0.1, 5, 5, math.nan])}, loglog=True))
    pts = root.find(NS + "polyline").get("points").split()
    assert len(pts) == 2


def test_nonfinite_dropped_linear():
    root = _parse(line_chart({"s": ([0, 1, 2], [1, math.inf, 3])}))
    assert len(root.find(NS + "polyline").get("points").split()) == 2


def test_empty_and_degenerate():
    _parse(line_chart({}))
    root = _parse(line_chart({"e": ([], [])}))
    assert root.find(NS + "polyline") is None
    _parse(line_chart({"c": ([1, 1], [2, 2])}))


def test_deterministic():
    s = {"a": ([0.1, 0.2], [3.0, 4.0])}
    assert line_chart(s) == line_chart(s)
