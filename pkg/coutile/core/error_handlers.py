"""Command-line error handlers.

This module is the bridge between domain exceptions and process exit codes.
It maps each error family to an exit status and a log line so that services
never deal with CLI concerns.

Exit codes:
    0 - success
    1 - any other CoutileError (protocol, crypto or computation failure)
    2 - configuration error (bad flag, config file or constraint)
"""

from collections.abc import Callable

from coutile.exceptions import (
    AnonymityViolationError,
    ComputationError,
    ConfigurationError,
    CoutileError,
    CryptoError,
    ProtocolError,
)
from coutile.utils.logger import logger

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def configuration_error_handler(exc: ConfigurationError) -> int:
    """
    Report an invalid configuration.

    Returns:
        int: 2, the conventional usage-error status.
    """
    if exc.field:
        logger.error(f"Invalid configuration ({exc.field}): {exc}")
    else:
        logger.error(f"Invalid configuration: {exc}")
    return EXIT_USAGE


def anonymity_violation_handler(exc: AnonymityViolationError) -> int:
    logger.error(f"Anonymity audit failed: {exc}")
    return EXIT_FAILURE


def protocol_error_handler(exc: ProtocolError) -> int:
    logger.error(f"Protocol error: {exc}")
    return EXIT_FAILURE


def crypto_error_handler(exc: CryptoError) -> int:
    logger.error(f"Cryptographic failure: {exc}")
    return EXIT_FAILURE


def computation_error_handler(exc: ComputationError) -> int:
    logger.error(f"Computation failed: {exc}")
    return EXIT_FAILURE


def coutile_error_handler(exc: CoutileError) -> int:
    logger.error(f"Run failed: {exc}")
    return EXIT_FAILURE


# Most specific first: subclasses must match before their parents.
EXCEPTION_HANDLERS: list[tuple[type[CoutileError], Callable[..., int]]] = [
    (ConfigurationError, configuration_error_handler),
    (AnonymityViolationError, anonymity_violation_handler),
    (ProtocolError, protocol_error_handler),
    (CryptoError, crypto_error_handler),
    (ComputationError, computation_error_handler),
    (CoutileError, coutile_error_handler),
]


def handle_cli_error(exc: CoutileError) -> int:
    """
    Log ``exc`` with the handler of its most specific registered type.

    Returns:
        int: the process exit code for the error.
    """
    for error_type, handler in EXCEPTION_HANDLERS:
        if isinstance(exc, error_type):
            return handler(exc)
    return coutile_error_handler(exc)
