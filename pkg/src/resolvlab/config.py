"""Run configuration: a small sectioned key-value dialect with round-trip.

Format (see configs/baseline.cfg for the annotated example):

    # comment
    [section]
    key = value        # trailing comments allowed

Values: integers, floats (1e-3, inf), booleans true/false, quoted
strings, and [v1, v2, ...] lists of scalars.  parse_config and
dumps_config round-trip; config_hash fingerprints the parsed content,
so formatting and comments never change the hash.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

from .grids import NormalGrid, TangentialGrid
from .regions import FluidParams, SectorSpec


class ConfigError(ValueError):
    pass


def _parse_scalar(tok: str):
    tok = tok.strip()
    if tok.startswith('"') and tok.endswith('"') and len(tok) >= 2:
        return json.loads(tok)
    if tok in ("true", "false"):
        return tok == "true"
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        return float(tok)
    except ValueError as exc:
        raise ConfigError(f"cannot parse value {tok!r}") from exc


def parse_config(text: str) -> dict:
    out: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if not section:
                raise ConfigError(f"line {lineno}: empty section name")
            out.setdefault(section, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, val = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if val.startswith("[") and val.endswith("]"):
            body = val[1:-1].strip()
            out[section][key] = [] if not body else \
                [_parse_scalar(t) for t in body.split(",")]
        else:
            out[section][key] = _parse_scalar(val)
    return out


def _format_scalar(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, str):
        return json.dumps(v)
    raise ConfigError(f"unsupported value type {type(v)}")


def dumps_config(cfg: dict) -> str:
    lines = []
    for section, body in cfg.items():
        lines.append(f"[{section}]")
        for key, val in body.items():
            if isinstance(val, list):
                lines.append(f"{key} = [{', '.join(_format_scalar(v) for v in val)}]")
            else:
                lines.append(f"{key} = {_format_scalar(val)}")
        lines.append("")
    return "\n".join(lines)


def canonical_json(obj) -> str:
    """Deterministic JSON with 17-significant-digit floats."""
    def enc(o):
        if isinstance(o, bool):
            return "true" if o else "false"
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            if math.isnan(o) or math.isinf(o):
                return json.dumps(str(o))
            return f"{o:.17g}"
        if isinstance(o, complex):
            return enc({"im": o.imag, "re": o.real})
        if isinstance(o, str):
            return json.dumps(o)
        if o is None:
            return "null"
        if isinstance(o, (list, tuple)):
            return "[" + ",".join(enc(v) for v in o) + "]"
        if isinstance(o, dict):
            items = sorted(o.items(), key=lambda kv: kv[0])
            return "{" + ",".join(json.dumps(str(k)) + ":" + enc(v)
                                  for k, v in items) + "}"
        if hasattr(o, "item"):
            return enc(o.item())
        raise TypeError(f"cannot serialize {type(o)}")
    return enc(obj)


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()


REQUIRED_BLOCKS = {
    "solve": ("fluid", "sector", "grid", "solve"),
    "verify-symbols": ("fluid", "sector", "scan"),
    "scan-nab": ("fluid", "sector", "nab"),
    "rbound": ("fluid", "sector", "grid", "rbound"),
    "evolve": ("fluid", "grid", "contour", "evolve"),
    "bent": ("fluid", "sector", "grid", "bent"),
}

RANDOMIZED_COMMANDS = ("rbound",)


@dataclass
class RunConfig:
    raw: dict
    fluid: FluidParams
    sector: SectorSpec | None
    seed: int | None
    tolerances: dict

    @classmethod
    def load(cls, text: str, command: str, seed=None, tol_overrides=None) -> "RunConfig":
        cfg = parse_config(text)
        missing = [b for b in REQUIRED_BLOCKS.get(command, ()) if b not in cfg]
        if missing:
            raise ConfigError(f"missing required block(s) {missing} for {command}")

        f = cfg.get("fluid", {})
        try:
            fluid = FluidParams(
                mu=float(f.get("mu", 1.0)), nu=float(f.get("nu", 1.0)),
                sigma=float(f.get("sigma", 1.0)), m=float(f.get("m", 1.0)),
                gamma1=float(f.get("gamma1", 1.0)), gamma3=float(f.get("gamma3", 1.0)),
                zeta=complex(float(f.get("zeta_re", 0.0)), float(f.get("zeta_im", 0.0))),
                zeta0=float(f.get("zeta0", 1.0)),
                rho1=float(f.get("rho1", f.get("gamma1", 1.0))),
                rho2=float(f.get("rho2", f.get("gamma1", 1.0))),
                rho3=float(f.get("rho3", f.get("gamma3", 1.0))),
            )
        except ValueError as exc:
            raise ConfigError(f"invalid [fluid]: {exc}") from exc

        sector = None
        if "sector" in cfg:
            s = cfg["sector"]
            try:
                sector = SectorSpec(
                    epsilon=float(s.get("epsilon", math.pi / 4)),
                    lambda0=float(s.get("lambda0", 1.0)),
                    zeta_case=s.get("zeta_case", "C3"),
                    rho3_over_nu=fluid.rho3 / fluid.nu)
            except ValueError as exc:
                raise ConfigError(f"invalid [sector]: {exc}") from exc

        run_seed = seed
        if run_seed is None:
            for block in cfg.values():
                if "seed" in block:
                    run_seed = int(block["seed"])
                    break
        if command in RANDOMIZED_COMMANDS and run_seed is None:
            raise ConfigError(f"{command} is randomized: a seed is required "
                              "(--seed or a seed key in the config)")

        tol = dict(cfg.get("tolerances", {}))
        for k, v in (tol_overrides or {}).items():
            tol[k] = v
        return cls(raw=cfg, fluid=fluid, sector=sector, seed=run_seed,
                   tolerances=tol)

    def grids(self):
        g = self.raw.get("grid", {})
        tg = TangentialGrid(dims=int(g.get("dims", 1)),
                            points=int(g.get("tangential_points", 64)),
                            half_length=float(g.get("half_length", 8.0)))
        ng = NormalGrid(points=int(g.get("normal_points", 96)),
                        truncation=float(g.get("truncation", 20.0)))
        return tg, ng
