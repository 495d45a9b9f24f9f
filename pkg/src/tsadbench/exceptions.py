"""Exception hierarchy shared by every tsadbench module."""


class TsadbenchError(Exception):
    """Base class for all errors raised by tsadbench."""


class ConfigError(TsadbenchError):
    """Some piece of configuration cannot be resolved."""


# -- specs ------------------------------------------------------------------

class SchemaError(TsadbenchError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class TypeMismatch(SchemaError):
    pass


class UnknownPrimitive(ConfigError):
    pass


class DataFlowError(ConfigError):
    """Primitives are wired so that some context key is missing or written twice."""


class DanglingInput(DataFlowError):
    pass


class BadOverride(ConfigError):
    pass


class PrimitiveError(TsadbenchError):
    """Wraps any exception raised from inside a primitive."""

    def __init__(self, name, stage, message):
        self.name = name
        self.stage = stage
        self.message = message
        super().__init__(f"primitive {name!r} failed during {stage}: {message}")


# -- numerical primitives ---------------------------------------------------

class SeriesTooShort(TsadbenchError, ValueError):
    pass


class AllMissing(TsadbenchError, ValueError):
    pass


class ShapeMismatch(TsadbenchError, ValueError):
    pass


class LengthMismatch(ShapeMismatch):
    pass


class MultivariateUnsupported(TsadbenchError, ValueError):
    pass


class EmptySequence(TsadbenchError, ValueError):
    pass


class EmptyIntersection(TsadbenchError, ValueError):
    pass


class NonFiniteLoss(TsadbenchError, ArithmeticError):
    pass


# -- remote detector --------------------------------------------------------

class RemoteError(TsadbenchError):
    pass


class RemoteTimeout(RemoteError):
    pass


class BadResponse(RemoteError):
    pass


class HttpStatus(RemoteError):
    def __init__(self, code, body=""):
        self.code = code
        super().__init__(f"remote detector answered HTTP {code}: {body[:200]}")


# -- evaluation / benchmark -------------------------------------------------

class MalformedIntervals(TsadbenchError, ValueError):
    pass


class MissingBaseline(TsadbenchError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NotPermutation(TsadbenchError, ValueError):
    pass


class NoCommonDatasets(TsadbenchError, ValueError):
    pass


class DuplicateVersion(TsadbenchError):
    pass


class BadVersionString(TsadbenchError, ValueError):
    pass


# -- data -------------------------------------------------------------------

class NotRegistered(ConfigError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class FetchFailed(TsadbenchError):
    def __init__(self, url, cause):
        self.url = url
        self.cause = cause
        super().__init__(f"could not fetch {url}: {cause}")


class ParseError(TsadbenchError, ValueError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class OverlapError(TsadbenchError, ValueError):
    pass
