"""Exception types raised across the library.

Validation failures carry enough context (vertex / element indices) to
locate the offending entity without re-running the check.
"""


class PolyProjError(Exception):
    """Base class for all library-specific errors."""


# -- polygon / mesh validation ------------------------------------------------

class PolygonError(PolyProjError):
    pass


class NotCCW(PolygonError):
    def __init__(self, signed_area):
        super().__init__(f"vertices are not counter-clockwise (signed area {signed_area:g})")
        self.signed_area = signed_area


class NotStrictlyConvex(PolygonError):
    def __init__(self, index, cross):
        super().__init__(f"vertex {index} breaks strict convexity (cross product {cross:g})")
        self.index = index
        self.cross = cross


class DuplicateVertex(PolygonError):
    def __init__(self, index):
        super().__init__(f"vertex {index} repeats an earlier vertex")
        self.index = index


# -- basis evaluation ----------------------------------------------------------

class PointOnBoundary(PolyProjError):
    """Interior-only evaluation was asked at a point on (or outside) the boundary."""


class PointNotOnBoundary(PolyProjError):
    """Trace evaluation was asked at a point not lying on any edge."""


class IllConditioned(PolyProjError):
    """Shape-function constraint system is numerically rank deficient."""


# -- quadrature ----------------------------------------------------------------

class UnsupportedOrder(PolyProjError):
    def __init__(self, order):
        super().__init__(f"quadrature order must be a positive integer, got {order!r}")
        self.order = order


class DegenerateQuad(PolyProjError):
    """A quadrangulation subdomain collapsed to (near) zero area."""


# -- projection / element matrices ----------------------------------------------

class InsufficientQuadrature(PolyProjError):
    """Quadratic elements need a rule of degree >= 2 on each subdomain."""


class SingularGram(PolyProjError):
    def __init__(self, cond):
        super().__init__(f"Gram matrix is numerically singular (cond {cond:.3e})")
        self.cond = cond


class NonSPD(PolyProjError):
    """Diffusion tensor failed the positive-definiteness spot check."""


# -- linear solve ----------------------------------------------------------------

class SolverDiverged(PolyProjError):
    pass
