from enum import Enum


class Mode(str, Enum):
    HBC = "hbc"
    RATIONAL = "rational"
    BASELINE = "baseline"


class ComputationKind(str, Enum):
    RANK_OF_INPUT = "RankOfInput"
    NEIGHBOR_DIFFS = "NeighborDiffs"
    VOTE_TALLY = "VoteTally"
    CUSTOM = "Custom"


class ComputationKindName(str, Enum):
    """Short names accepted by the ``computation`` setting."""

    RANK = "rank"
    DIFFS = "diffs"
    TALLY = "tally"


class CryptoBackend(str, Enum):
    DIGEST = "digest"
    CURVE = "curve"


class ForwardActionKind(str, Enum):
    HOP = "hop"
    SUBMIT = "submit"
    DISCARD = "discard"


class ForwardeeDecision(str, Enum):
    ACCEPT = "accept"
    DISCARD = "discard"


class ReverseActionKind(str, Enum):
    DELIVER = "deliver"
    BACKTRACK = "backtrack"
    FAIL = "fail"


class MessageKind(str, Enum):
    INPUT = "input"
    DISPATCH = "dispatch"


class ChannelEvent(str, Enum):
    HOP = "hop"
    SUBMIT = "submit"
    DISCARD = "discard"
    REFUSE = "refuse"
    BACKTRACK = "backtrack"
    DELIVER = "deliver"
    PUBLISH = "publish"


class ClientClass(str, Enum):
    GOOD = "good"
    BAD = "bad"
    ALL = "all"


class PunishmentRule(str, Enum):
    """How a punishment changes ℓ[rater, ratee]."""

    RESET = "reset"
    DECREMENT = "decrement"
