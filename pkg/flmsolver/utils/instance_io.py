"""
Instance I/O - JSON reading and writing for instances, solutions and reports
"""

import json
from pathlib import Path
from typing import Any, Union

from pydantic import BaseModel, ValidationError

from flmsolver.errors import PreconditionError
from flmsolver.models.instance import FlmInstance, FlmSolution, UflInstance

PathLike = Union[str, Path]


def _load(path: PathLike) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise PreconditionError(f"file not found: {path}")
    except json.JSONDecodeError as e:
        raise PreconditionError(f"invalid JSON in {path}: {e}")


def to_json(model: Union[BaseModel, dict, list], indent: int = 2) -> str:
    """Serialize a model (by alias, None fields dropped) or plain data"""
    if isinstance(model, BaseModel):
        return model.model_dump_json(by_alias=True, exclude_none=True, indent=indent)
    return json.dumps(model, indent=indent)


def write_json(path: PathLike, model: Union[BaseModel, dict, list]) -> None:
    """Write JSON to a file, creating parent directories"""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(to_json(model) + "\n", encoding="utf-8")


def read_instance(path: PathLike) -> FlmInstance:
    """
    Read an FLM instance file

    Raises:
        PreconditionError: unreadable file or schema mismatch
    """
    try:
        return FlmInstance.model_validate(_load(path))
    except ValidationError as e:
        raise PreconditionError(f"{path} is not an FLM instance: {e.error_count()} schema errors")


def instance_to_json(inst: FlmInstance, indent: int = 2) -> str:
    """
    Serialize an instance as it was read

    Only fields present in the source are written, so an explicit
    `"label": null` survives and an absent label stays absent. Keys come
    out in schema order.

    Args:
        inst: Instance (from a file or built in-process)
        indent: JSON indentation

    Returns:
        JSON text whose parsed value equals the source file's
    """
    return inst.model_dump_json(exclude_unset=True, indent=indent)


def write_instance(path: PathLike, inst: FlmInstance) -> None:
    """
    Write an instance file; write_instance(read_instance(f)) reproduces f
    up to whitespace and key order

    Args:
        path: Output file, parent directories are created
        inst: Instance to write
    """
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(instance_to_json(inst) + "\n", encoding="utf-8")


def read_ufl_instance(path: PathLike) -> UflInstance:
    """
    Read a UFL instance file (input of `generate --from-ufl`)

    Raises:
        PreconditionError: unreadable file or schema mismatch
    """
    try:
        return UflInstance.model_validate(_load(path))
    except ValidationError as e:
        raise PreconditionError(f"{path} is not a UFL instance: {e.error_count()} schema errors")


def read_solution(path: PathLike) -> FlmSolution:
    """
    Read a solution file

    Accepts a bare FlmSolution, or any report that embeds one under
    `solution` or `optimal_solution`.
    """
    data = _load(path)
    if isinstance(data, dict):
        for key in ("solution", "optimal_solution"):
            if isinstance(data.get(key), dict):
                data = data[key]
                break
    try:
        return FlmSolution.model_validate(data)
    except ValidationError as e:
        raise PreconditionError(f"{path} is not an FLM solution: {e.error_count()} schema errors")
