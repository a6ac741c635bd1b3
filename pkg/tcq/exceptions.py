"""
Error types raised by the TCQ toolkit
"""


class TCQError(ValueError):
    """Base class for every validation error raised by the toolkit"""


class CodebookError(TCQError):
    pass


class TrellisError(TCQError):
    pass


class PathConsistencyError(TCQError):
    """A QuantizedSeq whose codewords do not follow its branch bits"""


class BitstreamError(TCQError):
    pass


class EntropyError(TCQError):
    pass


class EntropyStreamError(EntropyError):
    """Arithmetic-coded stream ran out before all symbols were decoded"""


class TensorFormatError(TCQError):
    pass


class SourceSpecError(TCQError):
    pass


class OracleError(TCQError):
    pass


class ReportError(TCQError):
    """Benchmark results could not be written or read back"""
