"""JSON file formats and ``builtin:`` reference resolution.

Layouts:

* model: ``{"name", "dimension", "generators": [{"name", "degree"}], "rules":
  [{"lhs", "rhs"}], "integrals": [{"monomial", "value"}], "cotangent": [...]}``
* arrangement: ``[{"label", "class"}]``
* sheaf: ``{"rank": r, "chern": ["c_1 text", ...]}``
* rules: ``[{"lhs", "rhs": [{"coeff", "label", "class"}]}]``
* cover: see :func:`rhchi.cover.cover_from_dict`; ``domain``/``codomain`` are
  builtin names, model-file paths (relative to the cover file) or inline models.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping, Sequence

from . import builtins
from .charclass import SheafClass
from .cover import CoverData, cover_from_dict, cover_to_dict
from .exactring import ChowModel, ModelError
from .geometry import Arrangement, model_from_dict
from .selfx import RewriteRuleSet, rules_from_list

__all__ = [
    "read_json",
    "resolve_model",
    "resolve_arrangement",
    "resolve_sheaf",
    "resolve_rules",
    "resolve_cover",
    "sheaf_to_dict",
    "model_to_ref",
    "cover_to_file_dict",
]

BUILTIN = "builtin:"


def read_json(path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ModelError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path} is not valid JSON: {exc}") from exc


def _is_builtin(ref) -> bool:
    return isinstance(ref, str) and ref.startswith(BUILTIN)


def resolve_model(ref, base: Path | None = None) -> ChowModel:
    if isinstance(ref, ChowModel):
        return ref
    if isinstance(ref, Mapping):
        return model_from_dict(ref)
    if _is_builtin(ref):
        return builtins.model(ref)
    path = Path(ref)
    if base is not None and not path.is_absolute():
        path = base / path
    data = read_json(path)
    if not isinstance(data, Mapping):
        raise ModelError(f"model file {path} must hold a JSON object")
    return model_from_dict(data)


def _arrangement_from_data(model: ChowModel, data) -> Arrangement:
    if isinstance(data, Mapping):
        data = data.get("divisors", [])
    try:
        return Arrangement.of(model, [(d["label"], d["class"]) for d in data])
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed arrangement: {exc}") from exc


def resolve_arrangement(ref, model: ChowModel) -> Arrangement:
    if ref is None:
        return Arrangement.of(model)
    if isinstance(ref, Arrangement):
        return ref
    if _is_builtin(ref):
        return builtins.arrangement(model, ref)
    if isinstance(ref, (list, Mapping)):
        return _arrangement_from_data(model, ref)
    return _arrangement_from_data(model, read_json(ref))


def resolve_sheaf(ref, model: ChowModel) -> SheafClass:
    if ref is None:
        return SheafClass.trivial()
    data = ref if isinstance(ref, Mapping) else read_json(ref)
    try:
        rank = int(data.get("rank", 1))
        chern = [model.element(c) for c in data.get("chern", [])]
    except (TypeError, AttributeError) as exc:
        raise ModelError(f"malformed sheaf: {exc}") from exc
    return SheafClass(rank, tuple(chern[: model.dimension]))


def sheaf_to_dict(s: SheafClass) -> dict:
    return {"rank": s.rank, "chern": [str(c) for c in s.chern]}


def resolve_rules(ref, base_labels: Sequence[str] = ()) -> RewriteRuleSet:
    data = ref if isinstance(ref, list) else read_json(ref)
    if not isinstance(data, list):
        raise ModelError("rules file must hold a JSON list")
    return rules_from_list(data, base_labels)


def resolve_cover(ref) -> CoverData:
    if isinstance(ref, CoverData):
        return ref
    if _is_builtin(ref):
        return builtins.cover(ref)
    if isinstance(ref, Mapping):
        return cover_from_dict(ref, resolve_model)
    path = Path(ref)
    data = read_json(path)
    if not isinstance(data, Mapping):
        raise ModelError(f"cover file {path} must hold a JSON object")
    return cover_from_dict(data, lambda r: resolve_model(r, path.parent))


def model_to_ref(model: ChowModel) -> object:
    """``builtin:<name>`` for registry models, the inline model dict otherwise."""
    name = builtins.model_name_of(model)
    return BUILTIN + name if name else model.to_dict()


def cover_to_file_dict(c: CoverData, *, inline_models: bool = False) -> dict:
    return cover_to_dict(c, (lambda m: m.to_dict()) if inline_models else model_to_ref)
