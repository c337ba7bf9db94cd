"""Exception types shared across the package."""


class PostImpactError(Exception):
    """Base class for all package errors."""


# --- corpus ---------------------------------------------------------------

class MalformedRecord(PostImpactError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class DuplicateId(PostImpactError):
    def __init__(self, post_id: str, line: int | None = None):
        self.post_id = post_id
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate post id {post_id!r}{where}")


class EmptyCorpus(PostImpactError):
    pass


class EmptyBrand(PostImpactError):
    def __init__(self, brand: str):
        self.brand = brand
        super().__init__(f"brand {brand!r} has no posts")


# --- features -------------------------------------------------------------

class MissingVocabulary(PostImpactError):
    pass


class MissingTimeProfile(PostImpactError):
    pass


# --- learners -------------------------------------------------------------

class SingleClassTraining(PostImpactError):
    pass


class DimensionMismatch(PostImpactError):
    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"expected {expected} dimensions, got {got}")


class NotSupported(PostImpactError):
    pass


class VersionMismatch(PostImpactError):
    def __init__(self, expected: int, got):
        self.expected = expected
        self.got = got
        super().__init__(f"model format version {got!r} not supported (expected {expected})")


class CorruptModelFile(PostImpactError):
    pass


# --- evaluation -----------------------------------------------------------

class TooFewInstances(PostImpactError):
    pass


class EmptyReport(PostImpactError):
    pass


class UnwritablePath(PostImpactError):
    pass


# --- service --------------------------------------------------------------

class ModelMissing(PostImpactError):
    def __init__(self, problem):
        self.problem = problem
        super().__init__(f"no model for problem {problem}")


class EmptyDraft(PostImpactError):
    pass
