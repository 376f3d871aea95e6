"""Adaptive-precision orientation and incircle predicates.

Each predicate evaluates a determinant in floating point first and accepts
the result when it clears a forward error bound; otherwise it re-evaluates
exactly with rational arithmetic (binary doubles are dyadic rationals, so
``Fraction(float)`` is lossless). The returned sign is therefore always the
exact sign.
"""

from fractions import Fraction

# forward error bounds for the float filters (machine epsilon 2^-53)
_EPS = 2.0 ** -53
_CCW_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_ICC_BOUND = (10.0 + 96.0 * _EPS) * _EPS


def orient2d(ax, ay, bx, by, cx, cy):
    """Sign of the signed area of triangle (a, b, c).

    Returns +1 for counterclockwise, -1 for clockwise, 0 for collinear.
    """
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright

    if detleft > 0.0:
        if detright <= 0.0:
            return _sign(det)
        detsum = detleft + detright
    elif detleft < 0.0:
        if detright >= 0.0:
            return _sign(det)
        detsum = -detleft - detright
    else:
        return _sign(det)

    if abs(det) > _CCW_BOUND * detsum:
        return _sign(det)
    return _orient2d_exact(ax, ay, bx, by, cx, cy)


def incircle(ax, ay, bx, by, cx, cy, dx, dy):
    """Sign of the incircle determinant for CCW triangle (a, b, c) and
    query point d: +1 if d is strictly inside the circumcircle, -1 if
    strictly outside, 0 if exactly on it.
    """
    adx = ax - dx
    ady = ay - dy
    bdx = bx - dx
    bdy = by - dy
    cdx = cx - dx
    cdy = cy - dy

    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    alift = adx * adx + ady * ady

    cdxady = cdx * ady
    adxcdy = adx * cdy
    blift = bdx * bdx + bdy * bdy

    adxbdy = adx * bdy
    bdxady = bdx * ady
    clift = cdx * cdx + cdy * cdy

    det = (alift * (bdxcdy - cdxbdy)
           + blift * (cdxady - adxcdy)
           + clift * (adxbdy - bdxady))

    permanent = ((abs(bdxcdy) + abs(cdxbdy)) * alift
                 + (abs(cdxady) + abs(adxcdy)) * blift
                 + (abs(adxbdy) + abs(bdxady)) * clift)
    if abs(det) > _ICC_BOUND * permanent:
        return _sign(det)
    return _incircle_exact(ax, ay, bx, by, cx, cy, dx, dy)


def _sign(x):
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def _orient2d_exact(ax, ay, bx, by, cx, cy):
    ax, ay = Fraction(ax), Fraction(ay)
    bx, by = Fraction(bx), Fraction(by)
    cx, cy = Fraction(cx), Fraction(cy)
    det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return _sign(det)


def _incircle_exact(ax, ay, bx, by, cx, cy, dx, dy):
    dxf, dyf = Fraction(dx), Fraction(dy)
    adx, ady = Fraction(ax) - dxf, Fraction(ay) - dyf
    bdx, bdy = Fraction(bx) - dxf, Fraction(by) - dyf
    cdx, cdy = Fraction(cx) - dxf, Fraction(cy) - dyf
    det = ((adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
           + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
           + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady))
    return _sign(det)
