import unittest
import xml.etree.ElementTree as ET

import numpy as np

from pyfekete.plotting import render_tail_svg
from pyfekete.spectrum import TailCurve
from pyfekete.theory import PredictionEnvelope

SVG = '{http://www.w3.org/2000/svg}'


def _curve(d, rate):
    V = np.linspace(0, 3, 31)
    phi = np.exp(-0.3 * np.exp(rate * V))
    return TailCurve(V, phi, np.zeros(31), 10 ** 6, d, 1, 'midpoint', 0)


class TestRenderTailSvg(unittest.TestCase):

    def test_one_polyline_per_curve(self):
        svg = render_tail_svg([_curve(2, 1.5), _curve(3, 1.7)], title="orders 2 and 3")
        root = ET.fromstring(svg)
        self.assertEqual(root.tag, SVG + 'svg')
        self.assertEqual(len(root.findall(SVG + 'polyline')), 2)
        self.assertIn("orders 2 and 3", svg)
        self.assertIn("order 3 (midpoint)", svg)

    def test_envelopes_are_dashed_lines(self):
        envelopes = [PredictionEnvelope(2, 'lower', 0.12, np.pi / 2), PredictionEnvelope(2, 'upper', 0.0, np.pi / 2)]
        root = ET.fromstring(render_tail_svg([_curve(2, 1.5)], envelopes))
        lines = [el for el in root.iter(SVG + 'line') if el.get('stroke-dasharray')]
        # non-positive constants have no log and are skipped
        self.assertEqual(len(lines), 1)

    def test_tail_windows_marked_inside_range(self):
        svg = render_tail_svg([_curve(2, 1.5), _curve(3, 1.7)], windows={2: 1.2, 3: 7.5, 4: float('-inf')})
        root = ET.fromstring(svg)
        marks = [el for el in root.iter(SVG + 'line') if el.get('class') == 'tail-window']
        self.assertEqual(len(marks), 1)
        self.assertEqual(marks[0].get('x1'), marks[0].get('x2'))
        self.assertIn("window d=2", svg)
        self.assertNotIn("window d=3", svg)

    def test_degenerate_input(self):
        flat = TailCurve(np.array([0.0, 1.0]), np.array([1.0, 1.0]), np.zeros(2), 5, 2, 1, 'midpoint', 0)
        for curves in ([], [flat]):
            svg = render_tail_svg(curves)
            self.assertTrue(svg.endswith("</svg>\n"))
            ET.fromstring(svg)


if __name__ == '__main__':
    unittest.main()
