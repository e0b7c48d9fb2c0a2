"""Exception hierarchy. Every error names the pipeline stage it belongs to."""


class AskbimError(Exception):
    """Base error; `stage` is one of parse/map/plan/execute/represent."""

    stage = "parse"


class SpfSyntaxError(AskbimError):
    stage = "parse"

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" at line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(message + where)


class DuplicateInstanceError(AskbimError):
    stage = "parse"


class MissingReferenceError(AskbimError):
    stage = "parse"


class ExpressSyntaxError(AskbimError):
    stage = "parse"


class UnknownTypeError(AskbimError):
    stage = "parse"


class SerializationError(AskbimError):
    stage = "parse"


class EmbeddingCycleError(SerializationError):
    pass


class UnknownCollectionError(AskbimError):
    stage = "execute"


class StoreError(AskbimError):
    stage = "execute"


class PrejoinError(AskbimError):
    stage = "execute"


class DuplicateKeyError(PrejoinError):
    pass


class GraphError(AskbimError):
    stage = "plan"


class NoPathError(GraphError):
    pass


class UnreachableAnchorError(GraphError):
    pass


class QueryParseError(AskbimError):
    """Natural-language front end failures."""

    stage = "parse"


class UnsupportedSentenceError(QueryParseError):
    pass


class BracketedTreeError(QueryParseError):
    pass


class DictionaryError(AskbimError):
    stage = "map"


class ConceptNotFoundError(DictionaryError):
    def __init__(self, word, suggestions=()):
        self.word = word
        self.suggestions = list(suggestions)
        hint = ""
        if self.suggestions:
            hint = " (did you mean: " + ", ".join(self.suggestions) + "?)"
        super().__init__(f"no concept found for {word!r}" + hint)


class BindingError(DictionaryError):
    pass


class PlanError(AskbimError):
    stage = "plan"


class ExecutionError(AskbimError):
    stage = "execute"


class RepresentationError(AskbimError):
    stage = "represent"
