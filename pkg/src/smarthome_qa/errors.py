"""Exception types shared across the toolkit.

Every domain error derives from ToolError so the CLI can map them to
exit code 1; anything else escaping a command is a bug.
"""


class ToolError(Exception):
    """Base class for expected, user-reportable failures."""


class DatasetError(ToolError):
    pass


class IngestError(ToolError):
    pass


class RefineError(ToolError):
    pass


class LlmError(ToolError):
    pass


class TopicModelError(ToolError):
    pass


class EvalError(ToolError):
    pass


class ConfigError(ToolError):
    pass
