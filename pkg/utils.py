import json
import os
import time
from contextlib import contextmanager
from functools import lru_cache
from itertools import combinations
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from jsonschema import Draft7Validator

SCHEMA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "docs")


def sidon_collision(values: Sequence[int], modulus: Optional[int] = None) -> Optional[Tuple[Tuple[int, int], Tuple[int, int]]]:
    """
    Renvoie deux paires (a, b), (c, d) avec a − b = c − d (éventuellement modulo), ou None.
    Seules les différences entre éléments distincts comptent.
    """
    seen: Dict[int, Tuple[int, int]] = {}
    for a, b in combinations(values, 2):
        for x, y in ((a, b), (b, a)):
            diff = x - y if modulus is None else (x - y) % modulus
            if diff in seen and seen[diff] != (x, y):
                return seen[diff], (x, y)
            seen[diff] = (x, y)
    return None


def is_sidon(values: Sequence[int], modulus: Optional[int] = None) -> bool:
    if len(set(values)) != len(values):
        return False
    if modulus is not None and len({v % modulus for v in values}) != len(values):
        return False
    return sidon_collision(values, modulus) is None


def mian_chowla(k: int, start: int = 1) -> List[int]:
    """Suite gloutonne de Mian–Chowla : k entiers à différences deux à deux distinctes."""
    values: List[int] = []
    candidate = start
    while len(values) < k:
        if is_sidon(values + [candidate]):
            values.append(candidate)
        candidate += 1
    return values


def powers_of_two(k: int) -> List[int]:
    """Placement 2^1, …, 2^k."""
    return [2 ** j for j in range(1, k + 1)]


class ReportEncoder(json.JSONEncoder):
    """Encode numpy et les grands entiers (en chaînes décimales au-delà de 2^53)."""

    def default(self, o: Any) -> Any:
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, pd.DataFrame):
            return o.to_dict(orient="records")
        if hasattr(o, "to_json"):
            return o.to_json()
        if isinstance(o, (set, frozenset)):
            return sorted(o)
        return super().default(o)

    def iterencode(self, o: Any, _one_shot: bool = False) -> Iterator[str]:
        return super().iterencode(_stringify_big(o), _one_shot)


def _stringify_big(o: Any) -> Any:
    if isinstance(o, bool):
        return o
    if isinstance(o, np.integer):
        o = int(o)
    if isinstance(o, pd.DataFrame):
        return _stringify_big(o.to_dict(orient="records"))
    if hasattr(o, "to_json"):
        return _stringify_big(o.to_json())
    if isinstance(o, int) and abs(o) >= 2 ** 53:
        return str(o)
    if isinstance(o, dict):
        return {k: _stringify_big(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_stringify_big(v) for v in o]
    return o


def dumps(data: Any) -> str:
    """JSON déterministe (clés triées)."""
    return json.dumps(data, cls=ReportEncoder, sort_keys=True, indent=2, ensure_ascii=False)


def dataframe_to_markdown(df: pd.DataFrame) -> str:
    """Tableau Markdown (format pipe de tabulate) à partir d'un DataFrame."""
    if df.empty:
        return "_(vide)_"
    return df.to_markdown(index=False)


@contextmanager
def stopwatch() -> Iterator[Dict[str, float]]:
    """Mesure la durée d'un bloc ; le dictionnaire reçoit 'ms' à la sortie."""
    record = {"ms": 0.0}
    start = time.perf_counter()
    try:
        yield record
    finally:
        record["ms"] = (time.perf_counter() - start) * 1000.0


@lru_cache(maxsize=None)
def load_schema(name: str) -> Draft7Validator:
    """Validateur du schéma docs/<name>.schema.json."""
    with open(os.path.join(SCHEMA_DIR, f"{name}.schema.json"), encoding="utf-8") as handle:
        schema = json.load(handle)
    Draft7Validator.check_schema(schema)
    return Draft7Validator(schema)


def schema_errors(data: Any, name: str) -> List[str]:
    """Violations du schéma, sous la forme « chemin : message », triées par chemin."""
    errors = sorted(load_schema(name).iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    return [f"{'.'.join(map(str, e.absolute_path)) or '(racine)'} : {e.message}" for e in errors]
