"""Exception types shared by every module.

Each exception carries a stable ``code`` string so callers (and the CLI)
can dispatch on the error kind without matching on messages.
"""


class TensorCatError(Exception):
    code = "E_TENSORCAT"


class EvalSingular(TensorCatError):
    code = "E_EVAL_SINGULAR"


class UnboundSymbol(TensorCatError):
    code = "E_UNBOUND_SYMBOL"


class SamplingExhausted(TensorCatError):
    code = "E_SAMPLING_EXHAUSTED"


class TypeMismatch(TensorCatError):
    code = "E_TYPE_MISMATCH"


class SingularMetric(TensorCatError):
    code = "E_SINGULAR_METRIC"


class PortReused(TensorCatError):
    code = "E_PORT_REUSED"


class PortUnused(TensorCatError):
    code = "E_PORT_UNUSED"


class PortNotFree(TensorCatError):
    code = "E_PORT_NOT_FREE"


class SignatureMismatch(TensorCatError):
    code = "E_SIGNATURE_MISMATCH"


class ParseError(TensorCatError):
    code = "E_PARSE"

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class UnboundIndex(ParseError):
    code = "E_UNBOUND_INDEX"


class ReboundIndex(ParseError):
    code = "E_REBOUND_INDEX"
