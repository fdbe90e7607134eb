""" Utility functions """
import math
from pathlib import Path
from typing import Any, Dict, Union

import yaml


def dbm_to_watts(dbm: float) -> float:
    """ 10^((dBm - 30) / 10) """
    return 10 ** ((dbm - 30) / 10)


def watts_to_dbm(watts: float) -> float:
    if not watts > 0:
        raise ValueError(f"Power must be positive, got {watts}")
    return 10 * math.log10(watts) + 30


def db_to_linear(db: float) -> float:
    return 10 ** (db / 10)


def linear_to_db(value: float) -> float:
    """ Inverse of db_to_linear. +inf maps to +inf """
    if value == math.inf:
        return math.inf
    if not value > 0:
        raise ValueError(f"Ratio must be positive, got {value}")
    return 10 * math.log10(value)


def load_yaml_mapping(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Loads a YAML document whose top level is a mapping

    Args:
        path (Union[str, Path]): file to read
    Raises:
        TypeError: if the document is not a mapping
    Returns:
        (Dict[str, Any]): empty for an empty file
    """
    with open(path) as f:
        document = yaml.safe_load(f)
    if document is None:
        return {}
    if not isinstance(document, dict):
        raise TypeError(
            f"Expected a mapping in {path}, got {type(document).__name__}"
        )
    return document
