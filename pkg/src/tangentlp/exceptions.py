"""Exception hierarchy. Every error raised on bad input is a ``ValueError``."""


class TangentLpError(ValueError):
    """Base class for all input and parameter errors."""


class GraphError(TangentLpError):
    pass


class DisconnectedGraphError(GraphError):
    def __init__(self, component, n_components):
        self.component = list(component)
        self.n_components = n_components
        shown = ", ".join(map(str, self.component[:10]))
        more = "" if len(self.component) <= 10 else ", ..."
        super().__init__(
            f"graph is disconnected ({n_components} components); "
            f"component not containing vertex 0: [{shown}{more}]"
        )


class GraphParseError(GraphError):
    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class NotATreeError(GraphError):
    pass


class HyperbolicityCapError(TangentLpError):
    def __init__(self, n, cap):
        self.n = n
        self.cap = cap
        super().__init__(
            f"exact hyperbolicity needs O(n^4) work; graph has {n} vertices, "
            f"cap is {cap}. Use mode='sampled' (lower bound) or raise the cap."
        )


class AdmissibilityError(TangentLpError):
    pass


class InvalidEdgeError(TangentLpError):
    pass


class MissingSliceError(TangentLpError):
    pass


class BasepointMismatchError(TangentLpError):
    pass


class TruncationError(TangentLpError):
    def __init__(self, message, required_radius=None):
        self.required_radius = required_radius
        super().__init__(message)


class SummabilityError(TangentLpError):
    def __init__(self, p, minimal_p):
        self.p = p
        self.minimal_p = minimal_p
        super().__init__(
            f"tail not summable at p={p:g}; need p > {minimal_p:.6g}"
        )
