"""
Config-driven pipelines: seed -> transforms -> verification -> exports.

A pipeline config is a YAML mapping::

    seed:
      name: vacuum_planar_harmonic
      params: {kind: exp-trig, Bz0: 1.0}
    transforms:
      - transform: vacuum_rescale
        f: {kind: sin, offset: 2.0}
        C0: 1.0
        C1: 5.0
    domain: {min: [0, 0, 0], max: [1, 1, 1], samples: 10000, fd_step: 1.0e-3}
    tolerances: {analytic_tol: 1.0e-7, fd_tol: 1.0e-5}
    exports:
      - {what: all, format: vtk, path: state.vtk, stage: -1, grid: [9, 9, 9]}

Free functions are given by kind and coefficients (see
:meth:`anisoeq.freefunc.FreeFunction.from_spec`); there is no expression
parser. The whole chain is type-checked before anything is evaluated.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import yaml

from anisoeq import verify
from anisoeq.errors import AnisoEqError, ConfigError
from anisoeq.export import FORMATS, GridSpec, sample_state, write_export
from anisoeq.fields import default_fd_step
from anisoeq.freefunc import AbPair, FreeFunction
from anisoeq.sampling import SampleSet
from anisoeq.seeds import SEEDS, build_seed
from anisoeq.transforms import STAGE_KINDS, TransformSpec

log = logging.getLogger(__name__)

EXIT_OK, EXIT_BREACH, EXIT_ERROR = 0, 1, 2

_ALIASES = {
    "rescale_flowing": "flow_rescale",
    "rescale_static": "static_rescale",
    "rescale_vacuum": "vacuum_rescale",
    "symmetry_transform": "symmetry",
    "embed_as_anisotropic": "embed",
}

_STAGE_KEYS = {
    "flow_rescale": {"f", "g", "C0", "C1"},
    "static_rescale": {"f", "C0", "C1"},
    "vacuum_rescale": {"f", "C0", "C1"},
    "symmetry": {"a", "b", "C", "m", "n", "sign"},
    "embed": {"rho"},
}


@dataclass(frozen=True)
class ExportSpec:
    what: tuple  # field names, empty = all
    format: str
    path: str
    stage: int = -1
    shape: tuple = (9, 9, 9)


@dataclass(frozen=True)
class PipelineConfig:
    seed: str
    seed_params: dict
    transforms: tuple
    samples: SampleSet
    fd_step: float
    tolerances: verify.ToleranceSpec
    exports: tuple = ()
    out_dir: Optional[str] = None

    def with_overrides(self, fd_step=None, samples=None, tol=None, out_dir=None) -> "PipelineConfig":
        cfg = self
        if fd_step is not None:
            if not fd_step > 0:
                raise ConfigError("--fd-step must be positive")
            cfg = replace(cfg, fd_step=float(fd_step))
        if samples is not None:
            if samples < 1:
                raise ConfigError("--samples must be positive")
            cfg = replace(cfg, samples=cfg.samples.with_count(int(samples)))
        if tol is not None:
            cfg = replace(cfg, tolerances=replace(cfg.tolerances, fd_tol=float(tol)))
        if out_dir is not None:
            cfg = replace(cfg, out_dir=str(out_dir))
        return cfg

    def stage_names(self) -> list:
        return ["seed"] + [t.transform for t in self.transforms]

    def typecheck(self) -> list:
        """Return the state kind after each stage, raising on a mismatch."""
        kinds = [SEEDS[self.seed].kind]
        for i, t in enumerate(self.transforms, start=1):
            if not t.accepts(kinds[-1]):
                expected = " or ".join(sorted(STAGE_KINDS[t.transform][0]))
                raise ConfigError(
                    f"stage {i} ({t.transform}) expects a {expected} state, "
                    f"but stage {i - 1} produces a {kinds[-1]} state"
                )
            kinds.append(t.output_kind())
        for e in self.exports:
            if not -len(kinds) <= e.stage < len(kinds):
                raise ConfigError(f"export {e.path!r} refers to missing stage {e.stage}")
        return kinds


def _free(spec, where):
    if spec is None:
        return None
    try:
        return FreeFunction.from_spec(spec)
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_stage(i, d) -> TransformSpec:
    if not isinstance(d, dict) or "transform" not in d:
        raise ConfigError(f"transform {i} needs a 'transform' key")
    th = _ALIASES.get(d["transform"], d["transform"])
    if th not in _STAGE_KEYS:
        raise ConfigError(f"transform {i}: unknown transform {d['transform']!r}")
    extra = set(d) - {"transform"} - _STAGE_KEYS[th]
    if extra:
        raise ConfigError(f"transform {i} ({th}): unexpected keys {sorted(extra)}")
    where = f"transform {i} ({th})"
    kw = {}
    for k in ("f", "g", "m", "n", "rho"):
        if k in d:
            kw[k] = _free(d[k], f"{where} {k}")
    for k in ("C0", "C1"):
        if k in d:
            kw[k] = float(d[k])
    if th == "symmetry":
        a = _free(d.get("a", 1.0), f"{where} a")
        b = _free(d.get("b", 0.0), f"{where} b")
        C = float(d["C"]) if "C" in d else float(a(0.0) ** 2 - b(0.0) ** 2)
        kw["ab"] = AbPair(a, b, C)
        sign = d.get("sign", 1)
        if sign in ("+", "-"):
            sign = 1 if sign == "+" else -1
        if sign not in (1, -1):
            raise ConfigError(f"{where}: sign must be +1 or -1")
        kw["sign"] = int(sign)
    return TransformSpec(transform=th, **kw)


def parse_config(d: dict, base_dir=None) -> PipelineConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(d) - {"seed", "transforms", "domain", "tolerances", "exports", "out_dir"}
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    seed = d.get("seed")
    if not isinstance(seed, dict) or "name" not in seed:
        raise ConfigError("config needs seed.name")
    if seed["name"] not in SEEDS:
        raise ConfigError(f"unknown seed {seed['name']!r}; known: {', '.join(sorted(SEEDS))}")
    params = dict(seed.get("params") or {})
    stages = tuple(_parse_stage(i, t) for i, t in enumerate(d.get("transforms") or [], start=1))

    dom = d.get("domain") or {}
    box = (tuple(dom.get("min", (0.0, 0.0, 0.0))), tuple(dom.get("max", (1.0, 1.0, 1.0))))
    try:
        samples = SampleSet(box=box, count=int(dom.get("samples", 10_000)), seed=int(dom.get("seed", 20020101)))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"domain: {exc}") from exc
    fd_step = float(dom.get("fd_step", default_fd_step(samples.box)))
    tol = d.get("tolerances") or {}
    try:
        tols = verify.ToleranceSpec(float(tol.get("analytic_tol", 1e-7)), float(tol.get("fd_tol", 1e-5)))
    except ValueError as exc:
        raise ConfigError(f"tolerances: {exc}") from exc

    exports = []
    for j, e in enumerate(d.get("exports") or []):
        fmt = e.get("format", "vtk")
        if fmt not in FORMATS:
            raise ConfigError(f"export {j}: format must be one of {FORMATS}")
        if "path" not in e:
            raise ConfigError(f"export {j}: missing path")
        what = e.get("what", "all")
        what = () if what == "all" else tuple([what] if isinstance(what, str) else what)
        shape = tuple(int(n) for n in e.get("grid", (9, 9, 9)))
        if len(shape) != 3 or min(shape) < 1:
            raise ConfigError(f"export {j}: grid must be three positive integers")
        exports.append(ExportSpec(what, fmt, str(e["path"]), int(e.get("stage", -1)), shape))

    out_dir = d.get("out_dir")
    if out_dir is not None and base_dir is not None:
        out_dir = str(Path(base_dir) / out_dir)
    cfg = PipelineConfig(seed["name"], params, stages, samples, fd_step, tols, tuple(exports), out_dir)
    cfg.typecheck()
    return cfg


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    return parse_config(data, base_dir=path.parent)


def build_states(cfg: PipelineConfig) -> list:
    """Evaluate the chain; returns the state after each stage (seed first)."""
    try:
        state = build_seed(cfg.seed, **cfg.seed_params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"seed {cfg.seed!r}: {exc}") from exc
    states = [state]
    for t in cfg.transforms:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            state = t.apply(state, cfg.samples)
        for w in caught:
            log.warning("%s: %s", t.transform, w.message)
        states.append(state)
    return states


@dataclass
class RunResult:
    exit_code: int
    reports: list = field(default_factory=list)  # (stage name, report, tol)
    written: list = field(default_factory=list)
    message: str = ""


def _write_exports(cfg, states, out_dir: Path) -> list:
    written = []
    for e in cfg.exports:
        st = states[e.stage]
        grid = GridSpec.covering(cfg.samples.box, e.shape)
        exp = sample_state(st, grid, e.what or None)
        written.append(write_export(exp, out_dir / e.path, e.format, title=st.label))
    return written


def run_pipeline(cfg: PipelineConfig, out_dir=None, verify_stages: bool = True) -> RunResult:
    """Run a type-checked config and write reports/exports under ``out_dir``."""
    out_dir = Path(out_dir or cfg.out_dir or "out")
    try:
        cfg.typecheck()
        states = build_states(cfg)
    except AnisoEqError as exc:
        return RunResult(EXIT_ERROR, message=str(exc))

    result = RunResult(EXIT_OK)
    tol = cfg.tolerances.fd_tol
    try:
        if verify_stages:
            out_dir.mkdir(parents=True, exist_ok=True)
            for i, (name, st) in enumerate(zip(cfg.stage_names(), states)):
                reports = [("report", verify.verify_state(st, cfg.samples, h=cfg.fd_step))]
                if verify.surface_label(st) is not None:
                    reports.append(
                        ("surface", verify.check_surface(st, cfg.samples, h=cfg.fd_step,
                                                          psi=verify.surface_label(st)))
                    )
                for suffix, rep in reports:
                    path = out_dir / f"stage{i:02d}_{name}.{suffix}.yaml"
                    path.write_text(rep.to_text(tol))
                    result.written.append(path)
                    result.reports.append((f"{i:02d}_{name}", rep, tol))
                    if not rep.passed(tol):
                        result.exit_code = EXIT_BREACH
        result.written += _write_exports(cfg, states, out_dir)
    except AnisoEqError as exc:
        return RunResult(EXIT_ERROR, result.reports, result.written, str(exc))
    return result


def export_pipeline(cfg: PipelineConfig, out_dir=None) -> RunResult:
    return run_pipeline(cfg, out_dir, verify_stages=False)
