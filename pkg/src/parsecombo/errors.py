"""Exception hierarchy.

Every error carries a short ``code`` (the class name by default) so the
command-line front end can print ``ERROR:<code>: message`` lines that are
easy to grep.
"""


class ParseComboError(Exception):
    """Base class for all package errors."""

    @property
    def code(self):
        return type(self).__name__


# treebank I/O

class MalformedTree(ParseComboError):
    pass


class UnbalancedBrackets(MalformedTree):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class EmptyNode(MalformedTree):
    pass


class TrailingInput(MalformedTree):
    def __init__(self, position):
        super().__init__(f"unexpected input after the root closes at position {position}")
        self.position = position


class EmptySentence(ParseComboError):
    pass


class LineCountMismatch(ParseComboError):
    def __init__(self, counts):
        detail = ", ".join(f"{path}: {n}" for path, n in counts.items())
        super().__init__(f"files hold different numbers of trees ({detail})")
        self.counts = dict(counts)


class TokenCountMismatch(ParseComboError):
    def __init__(self, message, sentence=None, counts=None):
        if sentence is not None:
            message = f"sentence {sentence}: {message}"
        super().__init__(message)
        self.sentence = sentence
        self.counts = counts


class TokenStringMismatch(ParseComboError):
    def __init__(self, sentence, position, path, expected, found):
        super().__init__(
            f"sentence {sentence}: token {position} is {found!r} in {path}, expected {expected!r}"
        )
        self.sentence = sentence
        self.position = position


class CrossingInput(ParseComboError):
    def __init__(self, a, b):
        super().__init__(f"crossing constituents {a} and {b}")
        self.pair = (a, b)


# combination

class MissingGold(ParseComboError):
    def __init__(self, index):
        super().__init__(f"sentence {index} has no gold parse")
        self.index = index


class EmptyTrainingSet(ParseComboError):
    pass


class LengthMismatch(ParseComboError):
    pass


# evaluation

class EmptyCorpus(ParseComboError):
    pass


class AlignmentMismatch(ParseComboError):
    pass


# analysis / cli

class InvalidConfig(ParseComboError):
    pass


class ModelKMismatch(ParseComboError):
    pass


class UsageError(ParseComboError):
    pass
