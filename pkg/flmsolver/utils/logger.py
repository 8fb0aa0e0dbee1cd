"""
Logger Configuration - Structured logging for the FLM solver
Console output goes to stderr; stdout is reserved for JSON reports
"""

import logging
import sys
from pathlib import Path
from typing import Optional, Union


def setup_logger(
    name: str = "flmsolver",
    log_file: Optional[str] = None,
    level: Union[int, str] = logging.INFO,
) -> logging.Logger:
    """
    Setup and configure logger

    Args:
        name: Logger name
        log_file: Optional log file path
        level: Logging level

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)

    # Avoid duplicate handlers
    if logger.handlers:
        return logger

    detailed_formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    simple_formatter = logging.Formatter(
        '%(asctime)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(simple_formatter)
    logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(level)
        file_handler.setFormatter(detailed_formatter)
        logger.addHandler(file_handler)

    return logger


def configure(level: Union[int, str] = logging.INFO, log_file: Optional[str] = None) -> logging.Logger:
    """
    Re-apply level (and optionally a file handler) to the default logger

    Args:
        level: Logging level name or number
        log_file: Optional log file path

    Returns:
        The reconfigured default logger
    """
    logger.setLevel(level)
    for handler in logger.handlers:
        handler.setLevel(level)
    if log_file and not any(isinstance(h, logging.FileHandler) for h in logger.handlers):
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(level)
        file_handler.setFormatter(logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        ))
        logger.addHandler(file_handler)
    return logger


# Create default logger
logger = setup_logger(name="flmsolver", level=logging.WARNING)


def log_command(command: str, target: Optional[str] = None, status: str = "success"):
    """
    Log CLI command execution

    Args:
        command: Subcommand name
        target: Instance file or descriptor if applicable
        status: Command status
    """
    logger.info(f"Command: {command} | Target: {target or 'N/A'} | Status: {status}")


def log_lp_solve(value: float, cuts: int, rounds: int, relaxation: str = "full"):
    """
    Log a finished cutting-plane LP solve

    Args:
        value: Optimal LP value
        cuts: Number of blossom cuts added
        rounds: Number of LP solves performed
        relaxation: Relaxation variant
    """
    logger.info(f"LP Solved | Relaxation: {relaxation} | Value: {value:.6f} | Cuts: {cuts} | Rounds: {rounds}")


def log_reroute(mode: str, iterations: int, initial_potential: int, final_potential: int):
    """
    Log a finished reroute

    Args:
        mode: general or perfect
        iterations: Number of rerouting iterations
        initial_potential: Potential before the first iteration
        final_potential: Potential at termination
    """
    logger.info(
        f"Reroute {mode.upper()} | Iterations: {iterations} | "
        f"Potential: {initial_potential} -> {final_potential}"
    )


def log_rounding(lam: float, seed: int, cost: float, deterministic: bool = False):
    """
    Log a bifactor rounding outcome

    Args:
        lam: Scaling parameter lambda
        seed: RNG seed
        cost: Cost of the rounded UFL solution
        deterministic: Whether the fallback mode was used
    """
    kind = "DETERMINISTIC" if deterministic else "RANDOMIZED"
    logger.debug(f"Rounding {kind} | Lambda: {lam:.3f} | Seed: {seed} | Cost: {cost:.6f}")


def log_lemma_check(name: str, slack: float):
    """
    Log the slack of a runtime lemma check

    Args:
        name: Inequality name
        slack: Right-hand side minus left-hand side
    """
    status = "OK" if slack >= 0 else "TOLERATED"
    logger.debug(f"Lemma Check {status} | {name} | Slack: {slack:.3e}")


def log_error(error_type: str, message: str, details: Optional[str] = None):
    """
    Log error with details

    Args:
        error_type: Type of error
        message: Error message
        details: Additional error details
    """
    error_msg = f"ERROR: {error_type} | {message}"
    if details:
        error_msg += f" | Details: {details}"
    logger.error(error_msg)


def log_performance(operation: str, duration: float, items_processed: int = 1):
    """
    Log performance metrics

    Args:
        operation: Operation name
        duration: Duration in seconds
        items_processed: Number of items processed
    """
    avg_time = duration / items_processed if items_processed > 0 else duration
    logger.info(
        f"Performance | Operation: {operation} | "
        f"Duration: {duration:.3f}s | Items: {items_processed} | "
        f"Avg: {avg_time:.3f}s/item"
    )
