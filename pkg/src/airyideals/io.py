"""JSON serialization of families, tables and the generator cache."""

import json
import os
from pathlib import Path

from .airy import GeneratorFamily
from .heisenberg import modes_from_records, modes_to_records
from .weyl import AlgebraConfig, operator_from_records, operator_to_records

CACHE_ENV = "AIRYIDEALS_CACHE_DIR"


def dumps(obj):
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def config_to_dict(config):
    return {"max_index": config.max_index,
            "variable_only": sorted(config.variable_only),
            "derivative_only": sorted(config.derivative_only)}


def config_from_dict(d):
    if not d:
        return AlgebraConfig()
    return AlgebraConfig(d.get("max_index"), frozenset(d.get("variable_only", ())),
                         frozenset(d.get("derivative_only", ())))


def family_to_dict(F):
    return {"K": F.K, "max_var_index": F.max_var_index, "infinite": F.infinite,
            "config": config_to_dict(F.config), "label": F.label,
            "generators": {str(i): operator_to_records(F.generators[i]) for i in F.indices()}}


def family_from_dict(d):
    """Read a user-supplied family.

    ``{"K": int, "generators": {"<index>": [records]}}`` with optional
    ``config``, ``max_var_index`` and ``infinite``.
    """
    if "K" not in d or "generators" not in d:
        raise ValueError("family file needs 'K' and 'generators'")
    K = int(d["K"])
    config = config_from_dict(d.get("config"))
    gens = {int(i): operator_from_records(recs, K, config) for i, recs in d["generators"].items()}
    if not gens:
        raise ValueError("family has no generators")
    return GeneratorFamily(gens, K, max_var_index=d.get("max_var_index"),
                           infinite=bool(d.get("infinite", False)), label=d.get("label", ""))


def load_family(path):
    with open(path, encoding="utf-8") as fh:
        return family_from_dict(json.load(fh))


def load_operator(path, K=None, config=None):
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    if isinstance(d, list):
        d = {"terms": d}
    K = int(d.get("K", K if K is not None else 0))
    return operator_from_records(d["terms"], K, config)


class GeneratorCache:
    """Shifted generator modes stored per ``(N, K, kmax, varmax)``."""

    def __init__(self, directory=None):
        directory = directory or os.environ.get(CACHE_ENV)
        self.directory = Path(directory) if directory else None

    def path(self, cfg):
        name = f"wsp_N{cfg.N}_K{cfg.K}_k{cfg.kmax}_v{cfg.varmax}"
        if not cfg.shift:
            name += "_noshift"
        return self.directory / f"{name}.json"

    def load(self, cfg):
        if self.directory is None:
            return None
        p = self.path(cfg)
        if not p.exists():
            return None
        with open(p, encoding="utf-8") as fh:
            d = json.load(fh)
        return {int(i): modes_from_records(recs, cfg.K, cfg.N)
                for i, recs in d["modes"].items()}

    def store(self, cfg, modes):
        if self.directory is None:
            return
        self.directory.mkdir(parents=True, exist_ok=True)
        d = {"N": cfg.N, "K": cfg.K, "kmax": cfg.kmax, "varmax": cfg.varmax,
             "shift": cfg.shift,
             "modes": {str(i): modes_to_records(p) for i, p in sorted(modes.items())}}
        tmp = self.path(cfg).with_suffix(".tmp")
        tmp.write_text(dumps(d), encoding="utf-8")
        tmp.replace(self.path(cfg))
