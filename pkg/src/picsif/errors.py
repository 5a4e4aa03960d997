"""Named error types raised across the engine."""


class PicsifError(Exception):
    """Base for all engine errors."""


class UnknownFunctionSymbol(PicsifError):
    pass


class ArityError(PicsifError):
    pass


class ClockIndexError(PicsifError):
    pass


class ClockLengthMismatch(PicsifError):
    pass


class AxiomMismatch(PicsifError):
    def __init__(self, axiom: int, path: tuple, reason: str):
        super().__init__(f"axiom {axiom} does not match at {'.'.join(map(str, path)) or 'root'}: {reason}")
        self.axiom = axiom
        self.path = path


class SideConditionViolation(PicsifError):
    pass


class HoleError(PicsifError):
    pass


class StaleRedex(PicsifError):
    pass


class ScriptMismatch(PicsifError):
    pass


class EnumerationCapExceeded(PicsifError):
    pass


class ReplayDivergence(PicsifError):
    def __init__(self, step_index: int, detail: str):
        super().__init__(f"witness diverges at step {step_index}: {detail}")
        self.step_index = step_index


class ScenarioError(PicsifError):
    pass
