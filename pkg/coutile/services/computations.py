"""
Joint computations: built-in evaluators, the registry and the spec wire format.

Computations are declarative specs resolved through a registry, never mobile
code. Evaluators are ordinary Python functions, so loops and recursion inside
them are unconstrained.
"""

from collections.abc import Callable, Mapping, Sequence
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict

from coutile.core.config import SimConfig
from coutile.exceptions import CodecError, EvaluationError, MalformedSpecError
from coutile.models.computation import ComputationSpec, JointInput
from coutile.models.enums import ComputationKind, ComputationKindName
from coutile.utils.codec import Value, decode_prefix, encode_value

INVALID_BALLOT = "invalid"

Evaluator = Callable[[Sequence[Value], Value, Mapping[str, Value]], Value]
RandomOutput = Callable[
    [Sequence[Value], Mapping[str, Value], np.random.Generator], Value
]


class ComputationDefinition(BaseModel):
    """How to evaluate one kind of computation and how a cheating worker fakes it."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    evaluator: Evaluator
    random_output: RandomOutput
    embeds_own_input: bool


_REGISTRY: dict[str, ComputationDefinition] = {}


def eval_rank_of_input(inputs: Sequence[Value], own: Value) -> int:
    """
    Descending rank of ``own``: 1 + number of inputs strictly greater.

    Ties share the best rank, e.g. (5, 5, 3, 9) with own=5 gives 2.

    Raises:
        EvaluationError: if ``own`` is not among the inputs.
    """
    if own not in inputs:
        raise EvaluationError(f"Own input {own!r} is not among the joint inputs")
    return 1 + sum(1 for value in inputs if value > own)


def eval_neighbor_diffs(
    inputs: Sequence[Value], own: Value
) -> tuple[Value | None, Value | None]:
    """
    Differences with the neighbours of ``own`` in the descending ranking.

    Returns:
        (diff_prev, diff_next): next-richer value minus own (None when own is
        the maximum) and own minus next-poorer value (None when own is the
        minimum). Own is located at its first occurrence, so an equal
        duplicate is the poorer neighbour with difference 0.

    Raises:
        EvaluationError: if ``own`` is not among the inputs.
    """
    if own not in inputs:
        raise EvaluationError(f"Own input {own!r} is not among the joint inputs")
    ordered = sorted(inputs, reverse=True)
    position = ordered.index(own)
    diff_prev = ordered[position - 1] - own if position > 0 else None
    diff_next = own - ordered[position + 1] if position < len(ordered) - 1 else None
    return diff_prev, diff_next


def eval_vote_tally(inputs: Sequence[Value], options: Sequence[Value]) -> dict:
    """
    Absolute frequency of every option.

    Options nobody voted for appear with count 0. Ballots outside ``options``
    are counted under the reserved ``"invalid"`` key, which is present only
    when at least one ballot was spoiled.
    """
    counts: dict[Value, int] = {option: 0 for option in options}
    spoiled = 0
    for ballot in inputs:
        if ballot in counts:
            counts[ballot] += 1
        else:
            spoiled += 1
    if spoiled:
        counts[INVALID_BALLOT] = spoiled
    return counts


def _tally_options(params: Mapping[str, Value]) -> list[Value]:
    options = params.get("options")
    if not options:
        raise MalformedSpecError("VoteTally spec requires a non-empty 'options' list")
    if INVALID_BALLOT in options:
        raise MalformedSpecError(f"'{INVALID_BALLOT}' is a reserved tally key")
    return list(options)


def _random_rank(inputs: Sequence[Value], params: Mapping, rng: np.random.Generator):
    return int(rng.integers(1, len(inputs) + 1))


def _random_diffs(inputs: Sequence[Value], params: Mapping, rng: np.random.Generator):
    span = int(max(inputs)) - int(min(inputs))
    return int(rng.integers(0, span + 1)), int(rng.integers(0, span + 1))


def _random_tally(inputs: Sequence[Value], params: Mapping, rng: np.random.Generator):
    options = _tally_options(params)
    draws = rng.multinomial(len(inputs), np.full(len(options), 1 / len(options)))
    return {option: int(count) for option, count in zip(options, draws)}


def register_computation(
    name: str,
    evaluator: Evaluator,
    random_output: RandomOutput,
    embeds_own_input: bool = False,
) -> ComputationDefinition:
    """
    Add a computation to the registry.

    Custom computations are referenced by specs of kind ``Custom`` whose
    ``params["name"]`` equals ``name``. Registering an existing name replaces it.

    Example:
        >>> register_computation(
        ...     "max",
        ...     evaluator=lambda inputs, own, params: max(inputs),
        ...     random_output=lambda inputs, params, rng: int(rng.integers(0, 10)),
        ... )
    """
    definition = ComputationDefinition(
        name=name,
        evaluator=evaluator,
        random_output=random_output,
        embeds_own_input=embeds_own_input,
    )
    _REGISTRY[name] = definition
    return definition


def get_definition(spec: ComputationSpec) -> ComputationDefinition:
    """
    Resolve the registry entry for a spec.

    Raises:
        MalformedSpecError: for a Custom spec without a registered name.
    """
    if spec.kind is ComputationKind.CUSTOM:
        name = spec.params.get("name")
        if not isinstance(name, str) or name not in _REGISTRY:
            raise MalformedSpecError(f"Unknown custom computation {name!r}")
        return _REGISTRY[name]
    return _REGISTRY[spec.kind.value]


def _values(inputs: JointInput | Sequence[Value]) -> tuple[Value, ...]:
    return inputs.values if isinstance(inputs, JointInput) else tuple(inputs)


def evaluate(spec: ComputationSpec, inputs: JointInput | Sequence[Value]) -> Value:
    """
    Evaluate a spec on a joint input. Pure: depends only on its arguments.

    Raises:
        MalformedSpecError: if the spec lacks a required embedded input or params.
        EvaluationError: if the embedded input is not among the inputs.
    """
    definition = get_definition(spec)
    if definition.embeds_own_input and not spec.has_embedded_input:
        raise MalformedSpecError(
            f"{definition.name} requires the client's input embedded in the spec"
        )
    return definition.evaluator(_values(inputs), spec.embedded_input, spec.params)


def random_output(
    spec: ComputationSpec,
    inputs: JointInput | Sequence[Value],
    rng: np.random.Generator,
) -> Value:
    """Uniform draw from the output domain of ``spec``, independent of the true output."""
    definition = get_definition(spec)
    return definition.random_output(_values(inputs), spec.params, rng)


def build_computation(config: SimConfig) -> ComputationSpec:
    """The joint computation C selected by the ``computation`` setting."""
    match config.computation:
        case ComputationKindName.RANK:
            return ComputationSpec(kind=ComputationKind.RANK_OF_INPUT)
        case ComputationKindName.DIFFS:
            return ComputationSpec(kind=ComputationKind.NEIGHBOR_DIFFS)
        case ComputationKindName.TALLY:
            return ComputationSpec(
                kind=ComputationKind.VOTE_TALLY,
                params={"options": list(config.tally_options)},
            )
    raise MalformedSpecError(f"Unknown computation {config.computation!r}")


_KIND_CODES = {
    ComputationKind.RANK_OF_INPUT: 1,
    ComputationKind.NEIGHBOR_DIFFS: 2,
    ComputationKind.VOTE_TALLY: 3,
    ComputationKind.CUSTOM: 4,
}
_CODE_KINDS = {code: kind for kind, code in _KIND_CODES.items()}


def encode_spec(spec: ComputationSpec) -> bytes:
    """
    Serialize a spec as ``kind:u8, embedded_flag:u8, [embedded value], params``.

    Values and params use the canonical value codec, so equal specs encode to
    equal bytes.
    """
    out = bytes([_KIND_CODES[spec.kind], 1 if spec.has_embedded_input else 0])
    if spec.has_embedded_input:
        out += encode_value(spec.embedded_input)
    return out + encode_value(dict(spec.params))


def decode_spec(data: bytes) -> ComputationSpec:
    """
    Inverse of encode_spec.

    Raises:
        MalformedSpecError: on unknown kinds or undecodable bytes.
    """
    if len(data) < 2 or data[0] not in _CODE_KINDS or data[1] not in (0, 1):
        raise MalformedSpecError("Invalid spec header")
    try:
        offset = 2
        embedded: Any = None
        if data[1]:
            embedded, offset = decode_prefix(data, offset)
        params, offset = decode_prefix(data, offset)
    except CodecError as exc:
        raise MalformedSpecError(f"Invalid spec body: {exc}") from exc
    if offset != len(data) or not isinstance(params, dict):
        raise MalformedSpecError("Invalid spec body")
    return ComputationSpec(
        kind=_CODE_KINDS[data[0]], embedded_input=embedded, params=params
    )


register_computation(
    ComputationKind.RANK_OF_INPUT.value,
    evaluator=lambda inputs, own, params: eval_rank_of_input(inputs, own),
    random_output=_random_rank,
    embeds_own_input=True,
)
register_computation(
    ComputationKind.NEIGHBOR_DIFFS.value,
    evaluator=lambda inputs, own, params: eval_neighbor_diffs(inputs, own),
    random_output=_random_diffs,
    embeds_own_input=True,
)
register_computation(
    ComputationKind.VOTE_TALLY.value,
    evaluator=lambda inputs, own, params: eval_vote_tally(
        inputs, _tally_options(params)
    ),
    random_output=_random_tally,
    embeds_own_input=False,
)
