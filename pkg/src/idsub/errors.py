"""Exception hierarchy shared by every module of the toolkit."""


class IdsubError(Exception):
    """Base class for all toolkit errors."""


# -- code model ---------------------------------------------------------------

class CodeModelError(IdsubError):
    pass


class UnlexableInput(CodeModelError):
    def __init__(self, offset, message=None):
        self.offset = offset
        super().__init__(message or f"cannot lex input at byte offset {offset}")


class CodeSyntaxError(CodeModelError):
    """Source does not parse cleanly (the parse tree has error nodes)."""

    def __init__(self, offset, line, column, message=None):
        # line and column are 1-based
        self.offset = offset
        self.line = line
        self.column = column
        super().__init__(message or f"syntax error at line {line}, column {column}")


class UnsupportedLanguage(CodeModelError):
    pass


class SubstitutionError(CodeModelError):
    pass


class UnknownIdentifier(SubstitutionError):
    pass


class CaptureViolation(SubstitutionError):
    pass


class KeywordCollision(SubstitutionError):
    pass


class InvalidName(SubstitutionError):
    pass


# -- victims ------------------------------------------------------------------

class VictimError(IdsubError):
    pass


class VictimConfigError(VictimError):
    pass


class TransportError(VictimError):
    """Network failure talking to a remote endpoint (retryable)."""


class MalformedResponse(VictimError):
    def __init__(self, message, body=""):
        self.body = body[:200]
        super().__init__(f"{message}: {self.body!r}" if body else message)


class KindMismatch(VictimError):
    pass


class MissingBaseline(VictimError):
    pass


class DegenerateCorpus(VictimError):
    pass


class BudgetExhausted(VictimError):
    pass


# -- metrics / stats ----------------------------------------------------------

class MetricError(IdsubError):
    pass


class NoIdentifiers(MetricError):
    pass


class LengthMismatch(MetricError):
    pass


class EmptyInput(MetricError):
    pass


class EmptyStream(MetricError):
    pass


class ParseRequired(MetricError):
    pass


class InvalidDistribution(MetricError):
    pass


class ConstantInput(MetricError):
    pass


# -- judge --------------------------------------------------------------------

class JudgeError(IdsubError):
    pass


class OverLengthInput(JudgeError):
    def __init__(self, estimate, limit):
        self.estimate = estimate
        self.limit = limit
        super().__init__(f"prompt is ~{estimate} tokens, limit is {limit}")


class Unparseable(JudgeError):
    pass


class ScoreOutOfRange(JudgeError):
    def __init__(self, score):
        self.score = score
        super().__init__(f"score {score} is outside 1..5")


# -- cli ----------------------------------------------------------------------

class ConfigError(IdsubError):
    pass
