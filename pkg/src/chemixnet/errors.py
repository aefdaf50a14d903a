"""Exception hierarchy shared by every chemixnet module."""


class ChemixError(Exception):
    """Base class for all errors raised by chemixnet."""


# smiles_codec
class EmptyCorpus(ChemixError, ValueError):
    pass


class EmptyString(ChemixError, ValueError):
    pass


class UnknownCharacter(ChemixError, LookupError):
    pass


class TooLong(ChemixError, ValueError):
    pass


class MalformedRow(ChemixError, ValueError):
    """A row of an encoded matrix or a data file does not have the expected form."""


# molgraph
class SmilesError(ChemixError, ValueError):
    """Base class for SMILES parse failures; ``position`` is a 0-based offset."""

    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} (at position {position})")
        self.position = position


class EmptyInput(SmilesError):
    pass


class UnbalancedParenthesis(SmilesError):
    pass


class UnmatchedRingClosure(SmilesError):
    pass


class UnknownToken(SmilesError):
    pass


# fingerprint
class DuplicateId(ChemixError, ValueError):
    pass


# tensor_engine
class ShapeMismatch(ChemixError, ValueError):
    pass


class UnboundInput(ChemixError, LookupError):
    pass


class NonFiniteValue(ChemixError, FloatingPointError):
    def __init__(self, node_name):
        super().__init__(f"non-finite value produced at node {node_name!r}")
        self.node_name = node_name


class NotScalarLoss(ChemixError, ValueError):
    pass


class ForwardNotRun(ChemixError, RuntimeError):
    pass


# nn_components
class IndexOutOfRange(ChemixError, IndexError):
    pass


class NonFiniteGradient(ChemixError, FloatingPointError):
    pass


class DomainError(ChemixError, ValueError):
    pass


class ZeroTarget(ChemixError, ValueError):
    pass


class SingleClass(ChemixError, ValueError):
    pass


# model_zoo
class InvalidSpec(ChemixError, ValueError):
    pass


# data_pipeline
class MissingColumn(ChemixError, LookupError):
    pass


class BadTarget(ChemixError, ValueError):
    pass


class EmptyFile(ChemixError, ValueError):
    pass


class TooFewRecords(ChemixError, ValueError):
    pass


class NotClassification(ChemixError, ValueError):
    pass


# trainer
class MissingFingerprints(ChemixError, ValueError):
    pass


class NonFiniteLoss(ChemixError, FloatingPointError):
    pass


class VersionMismatch(ChemixError, ValueError):
    pass


class CorruptFile(ChemixError, ValueError):
    pass
