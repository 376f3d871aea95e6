import numpy as np

from gmaplatent.predicates import incircle, orient2d


def test_orientation_signs():
    assert orient2d(0, 0, 1, 0, 0, 1) == 1
    assert orient2d(0, 0, 0, 1, 1, 0) == -1
    assert orient2d(0, 0, 1, 1, 2, 2) == 0


def test_orientation_near_degenerate_matches_exact():
    # points nearly collinear by an offset far below float noise of the
    # naive determinant
    base = 1e7
    a = (base, base)
    b = (base + 1.0, base + 1.0)
    c = (base + 2.0, base + 2.0 + 1e-9)
    assert orient2d(*a, *b, *c) == 1
    c = (base + 2.0, base + 2.0 - 1e-9)
    assert orient2d(*a, *b, *c) == -1


def test_incircle_signs():
    # unit circle through three points, queries inside/on/outside
    a, b, c = (1, 0), (0, 1), (-1, 0)
    assert incircle(*a, *b, *c, 0.0, 0.0) == 1
    assert incircle(*a, *b, *c, 0.0, -1.0) == 0
    assert incircle(*a, *b, *c, 2.0, 0.0) == -1


def test_incircle_cocircular_exact_zero():
    # four corners of a square are exactly cocircular
    assert incircle(0, 0, 1, 0, 1, 1, 0, 1) == 0


def test_predicates_match_fraction_oracle():
    from fractions import Fraction

    rng = np.random.default_rng(42)
    for _ in range(200):
        pts = rng.normal(size=(4, 2))
        if rng.random() < 0.5:
            pts[3] = pts[0] + (pts[1] - pts[0]) * rng.random()  # near-degenerate
        a, b, c, d = pts
        det = ((Fraction(a[0]) - Fraction(c[0])) * (Fraction(b[1]) - Fraction(c[1]))
               - (Fraction(a[1]) - Fraction(c[1])) * (Fraction(b[0]) - Fraction(c[0])))
        expected = (det > 0) - (det < 0)
        assert orient2d(a[0], a[1], b[0], b[1], c[0], c[1]) == expected
