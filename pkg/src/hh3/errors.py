"""Exception types shared across the package.

Everything raised deliberately by this library derives from ``Hh3Error``,
so callers can catch one type.  Overflow inside the moment helpers uses the
builtin ``OverflowError`` (it is an overflow, and the builtin name says so).
"""

from __future__ import annotations


class Hh3Error(Exception):
    """Base class for errors raised by this package."""


class ExprSyntaxError(Hh3Error):
    """Raised when expression text cannot be parsed.

    ``offset`` is the byte offset into the source string where the parse
    stopped, and ``expected`` is the tuple of token descriptions that would
    have been accepted there.
    """

    def __init__(self, offset: int, expected: tuple[str, ...], found: str):
        self.offset = offset
        self.expected = expected
        self.found = found
        want = " or ".join(expected)
        super().__init__(f"offset {offset}: expected {want}, found {found}")


class UnknownIdentifier(ExprSyntaxError):
    """Raised for names that are not ``x``, a known constant or function."""

    def __init__(self, offset: int, name: str):
        self.name = name
        Hh3Error.__init__(self, f"offset {offset}: unknown identifier {name!r}")
        self.offset = offset
        self.expected = ("x", "pi", "e", "exp", "log", "sin", "cos", "sqrt")
        self.found = name


class DomainError(Hh3Error):
    """A value left the mathematical domain of an operation.

    Carries the offending (sub)expression text and the evaluation point when
    they are known; both stay ``None`` for scalar helpers such as the moment
    functions.
    """

    def __init__(self, message: str, *, expr_text: str | None = None,
                 x: float | None = None):
        self.expr_text = expr_text
        self.x = x
        if expr_text is not None and x is not None:
            message = f"{message} (in {expr_text!r} at x = {x!r})"
        elif expr_text is not None:
            message = f"{message} (in {expr_text!r})"
        super().__init__(message)


class NonPositiveThirdDerivative(Hh3Error):
    """|f'''| vanished (or was not finite) where a bound needs it positive."""

    def __init__(self, x: float, value: float):
        self.x = x
        self.value = value
        super().__init__(
            f"|f'''| must be positive and finite; got {value!r} at x = {x!r}"
        )


class BadInterval(Hh3Error):
    """Interval endpoints are not finite numbers with a < b."""


class NonConvergence(Hh3Error):
    """The adaptive reference integrator exhausted its evaluation budget."""

    def __init__(self, evals: int, message: str = ""):
        self.evals = evals
        text = message or (
            f"reference integration did not converge within {evals} evaluations"
        )
        super().__init__(text)


class ToleranceUnreachable(Hh3Error):
    """Refinement hit its cap before the certified bound met the tolerance."""

    def __init__(self, tol: float, best_bound: float, n_final: int):
        self.tol = tol
        self.best_bound = best_bound
        self.n_final = n_final
        super().__init__(
            f"certified bound {best_bound!r} did not reach tol {tol!r} "
            f"by n = {n_final}"
        )


class NotConvex(Hh3Error):
    """Sampled convexity check failed; carries a witness point."""

    def __init__(self, x: float, value: float):
        self.x = x
        self.value = value
        super().__init__(f"f'' = {value!r} < 0 at x = {x!r}; f is not convex there")
