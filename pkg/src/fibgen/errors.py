"""Exception hierarchy.

Every error carries the offending indices so a failure can be replayed.
"""


class FibgenError(Exception):
    """Base class for all errors raised by fibgen."""


class ParseError(FibgenError):
    pass


class AxiomError(FibgenError):
    """A presentation violates a category or functor axiom."""


class MissingIdentity(AxiomError):
    def __init__(self, obj, detail=""):
        self.obj = obj
        super().__init__(f"identity of object {obj} is not a two-sided unit{detail}")


class NonAssociative(AxiomError):
    def __init__(self, h, g, f):
        self.triple = (h, g, f)
        super().__init__(f"(h∘g)∘f != h∘(g∘f) for h={h}, g={g}, f={f}")


class BadCompositionDomain(AxiomError):
    def __init__(self, g, f, reason):
        self.pair = (g, f)
        super().__init__(f"composite comp[{g}][{f}]: {reason}")


class NotPreservingComposite(AxiomError):
    def __init__(self, g, f):
        self.pair = (g, f)
        super().__init__(f"functor does not preserve the composite of g={g} after f={f}")


class NotPreservingIdentity(AxiomError):
    def __init__(self, obj):
        self.obj = obj
        super().__init__(f"functor does not preserve the identity of object {obj}")


class NotAFibration(FibgenError):
    def __init__(self, u, e):
        self.u, self.e = u, e
        super().__init__(f"base morphism {u} has no cartesian lift at object {e}")


class InvalidChoice(FibgenError):
    def __init__(self, u, e, chosen):
        self.u, self.e, self.chosen = u, e, chosen
        super().__init__(f"chosen morphism {chosen} is not a cartesian lift of {u} at {e}")


class NotSplitCleavage(FibgenError):
    pass


class EquationFailed(FibgenError):
    def __init__(self, name, detail=""):
        self.name = name
        super().__init__(f"equation {name!r} fails{': ' + detail if detail else ''}")


class MissingLimit(FibgenError):
    """A required terminal object, product or pullback does not exist."""


class MissingPullback(MissingLimit):
    pass


class BoundTooSmall(FibgenError):
    pass


class BoundsTooLarge(FibgenError):
    pass


class NotGeneric(FibgenError):
    pass


class ImplicationViolated(FibgenError):
    """A classification contradicts a proved implication; always a bug."""

    def __init__(self, stronger, weaker, obj):
        self.stronger, self.weaker, self.obj = stronger, weaker, obj
        super().__init__(f"object {obj}: {stronger} holds but {weaker} does not")


class UnknownBuilder(FibgenError):
    pass


class UnknownArtifact(FibgenError):
    pass


class BadIndex(FibgenError):
    pass
