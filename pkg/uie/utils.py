# Std lib
from typing import Tuple, List, Optional, Dict, Union, Any, Iterable, Sequence
import os
import sys
import csv
import json
import hashlib
# Non std lib
import tqdm
import yaml


FORMAT_VERSION = 1


class PreconditionError(ValueError):
    """ Raised when an operation receives a value outside of its domain """


class ContractViolation(ValueError):
    """ Raised when an invariant shared between several values is broken """


class ConfigurationError(ValueError):
    """ Raised when a configuration is invalid. Carries every violation found, not only the first one.

    >>> str(ConfigurationError(["alpha must be in [0, 1]", "runs must be >= 1"]))
    'Invalid configuration:\\n - alpha must be in [0, 1]\\n - runs must be >= 1'
    """
    def __init__(self, violations: Sequence[str]):
        self.violations: List[str] = list(violations)
        super(ConfigurationError, self).__init__(
            "Invalid configuration:\n" + "\n".join(f" - {violation}" for violation in self.violations)
        )


def _sbmsg(msg) -> str:
    return f"[Subtask] {msg}"


def message(msg: str) -> None:
    """ Writes a message on stderr without breaking a running progress bar """
    tqdm.tqdm.write(msg, file=sys.stderr)


def change_ext(filepath: str, new_ext: str) -> str:
    """
    >>> change_ext("output/compare.csv", "json")
    'output/compare.json'
    """
    return os.path.splitext(filepath)[0] + f".{new_ext}"


def string_to_hash(value: Union[str, Dict[str, Any]]) -> str:
    """ Short stable hash of a string or of a JSON-serialisable dictionary (keys are sorted)

    >>> string_to_hash({"b": 1, "a": 2}) == string_to_hash({"a": 2, "b": 1})
    True
    """
    if not isinstance(value, str):
        value = json.dumps(value, sort_keys=True)
    result = hashlib.sha256(value.encode("utf-8"))
    return result.hexdigest()[:10]


def parse_pair(value: str) -> Tuple[int, int]:
    """ Parse a `x,y` coordinate

    >>> parse_pair("66,66")
    (66, 66)
    >>> parse_pair(" 2 , 0 ")
    (2, 0)
    """
    parts = [part.strip() for part in value.split(",")]
    if len(parts) != 2:
        raise ValueError(f"Expected `x,y`, got `{value}`")
    return int(parts[0]), int(parts[1])


def parse_grid(value: str) -> Tuple[int, int]:
    """ Parse a `WxH` grid size

    >>> parse_grid("200x200")
    (200, 200)
    >>> parse_grid("30X20")
    (30, 20)
    """
    parts = value.lower().split("x")
    if len(parts) != 2:
        raise ValueError(f"Expected `WxH`, got `{value}`")
    return int(parts[0]), int(parts[1])


def parse_floats(value: Union[str, Iterable[float]]) -> List[float]:
    """ Parse a comma separated list of floats, or a `start:stop:step` range (stop included)

    >>> parse_floats("0.05,0.15,0.3")
    [0.05, 0.15, 0.3]
    >>> parse_floats("0.5:1.0:0.25")
    [0.5, 0.75, 1.0]
    >>> parse_floats("")
    []
    """
    if not isinstance(value, str):
        return [float(element) for element in value]
    value = value.strip()
    if not value:
        return []
    if ":" in value:
        start, stop, step = (float(part) for part in value.split(":"))
        if step <= 0:
            raise ValueError(f"Range step must be positive, got `{value}`")
        count = int(round((stop - start) / step))
        return [round(start + idx * step, 10) for idx in range(count + 1)]
    return [float(part) for part in value.split(",") if part.strip()]


def format_number(value: Union[int, float]) -> str:
    """ Locale independent formatting for CSV cells

    >>> format_number(3)
    '3'
    >>> format_number(0.1 + 0.2)
    '0.300000'
    >>> format_number(float("nan"))
    'nan'
    """
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    return format(float(value), ".6f") if value == value else "nan"


def write_csv(target: Optional[str], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """ Writes a UTF-8 CSV table with a header row. `target=None` writes on stdout. """
    lines = [[cell if isinstance(cell, str) else format_number(cell) for cell in row] for row in rows]
    if target is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(lines)
        return
    directory = os.path.dirname(target)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(lines)


def write_json(target: Optional[str], document: Dict[str, Any]) -> None:
    """ Writes a JSON document carrying the format version. `target=None` writes on stdout. """
    document = {"version": FORMAT_VERSION, **document}
    text = json.dumps(document, indent=2, sort_keys=True)
    if target is None:
        sys.stdout.write(text + "\n")
        return
    directory = os.path.dirname(target)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(target, "w", encoding="utf-8") as handle:
        handle.write(text + "\n")


def read_json(filepath: str) -> Dict[str, Any]:
    with open(filepath, encoding="utf-8") as handle:
        return json.load(handle)


def load_yaml(filepath: str) -> Dict[str, Any]:
    """ Reads an experiment file. An empty file is an empty configuration. """
    with open(filepath, encoding="utf-8") as handle:
        content = yaml.safe_load(handle)
    if content is None:
        return {}
    if not isinstance(content, dict):
        raise ConfigurationError([f"{filepath}: expected a mapping at the top level"])
    return content
