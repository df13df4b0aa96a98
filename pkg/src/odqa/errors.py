"""Exception types shared across the pipeline.

The CLI maps these onto exit codes: DataError -> 2, ReaderProtocolError -> 3.
"""


class OdqaError(Exception):
    """Base class for all pipeline errors."""


class DataError(OdqaError):
    """Malformed or inconsistent input data (corpus, datasets, artifacts)."""


class DuplicateParagraphError(DataError):
    """Two paragraphs with the same (doc_id, para_id) in one corpus."""


class IndexFormatError(DataError):
    """Persisted index is missing, corrupt, or has an unsupported version."""


class ReaderProtocolError(OdqaError):
    """Reader transport failure: timeout, malformed response, or bad span.

    Carries the request id (when one exists) so the failing paragraph can be
    identified from logs.
    """

    def __init__(self, message, request_id=None):
        super().__init__(message)
        self.request_id = request_id
