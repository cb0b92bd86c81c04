"""Sweep runner: resolve a SweepSpec from flags and scenario files and run it."""

import json
import os
import re
from collections.abc import Iterator
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import yaml
from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn

from .hybrid import MLD_SCHEME, HybridConfig, parse_scheme, scheme_name
from .report import FORMATS, ResultWriter, summary_table
from .simulation import ML_MAX_MESSAGE_BITS, StopRule, SweepPoint, derive_seed, run_point
from .turbo import CodeConfig

console = Console()

DEFAULTS: dict[str, Any] = {
    "scheme": "STD",
    "max_iters": 8,
    "extrinsic_scale": 0.75,
    "frames_max": 1_000_000,
    "errors_min": 100,
    "seed": 1,
    "format": "csv",
    "results_dir": "results",
    "workers": 1,
}

# option name -> HybridConfig field, applied on top of the named scheme
_COMPONENTS = {
    "osd_order": "osd_order",
    "osd_start_iter": "start_iteration",
    "accum_alpha": "accum_alpha",
    "detection": "detection",
    "crc_mode": "crc_mode",
    "eta": "eta",
}


class SpecError(ValueError):
    """A rejected sweep option; `field` names it."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def load_config(path: str = "config.yaml") -> dict:
    """Runtime defaults, with config.yaml (if present) over the built-in ones."""
    config = dict(DEFAULTS)
    p = Path(path)
    if p.exists():
        config.update(yaml.safe_load(p.read_text()) or {})
    return config


def load_scenario(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise SpecError("config", f"scenario file not found: {p}")
    data = yaml.safe_load(p.read_text()) or {}
    if not isinstance(data, dict):
        raise SpecError("config", f"scenario file {p} must hold a mapping")
    return {key.replace("-", "_"): value for key, value in data.items()}


@dataclass
class SweepSpec:
    k: int
    scheme: str
    hybrid: HybridConfig | None
    ebn0: list[float]
    stop: StopRule
    seed: int
    out: Path
    fmt: str
    workers: int = 1
    warnings: list[str] = field(default_factory=list)

    @property
    def code(self) -> CodeConfig:
        return CodeConfig.for_size(self.k)

    @property
    def decoder_scheme(self) -> str | HybridConfig:
        return self.hybrid if self.hybrid is not None else self.scheme

    def resolved(self) -> dict[str, Any]:
        """Full configuration as written into JSON results."""
        doc: dict[str, Any] = {
            "scheme": self.scheme,
            "k": self.k,
            "m": self.code.m,
            "rate": str(self.code.rate),
            "ebn0_db": self.ebn0,
            "frames_max": self.stop.max_frames,
            "errors_min": self.stop.min_frame_errors,
            "seed": self.seed,
        }
        if self.hybrid is not None:
            h = self.hybrid
            doc.update({
                "max_iters": h.t_max,
                "extrinsic_scale": h.extrinsic_scale,
                "osd_order": h.osd_order,
                "osd_start_iter": h.start_iteration,
                "accum_alpha": h.accum_alpha,
                "crc_mode": h.crc_mode.value,
                "detection": h.detection.value,
                "eta": h.resolved_eta(self.k) if h.uses_osd else None,
            })
        return doc

    def resume_key(self) -> dict[str, Any]:
        """Everything a completed point depends on apart from its own Eb/N0 and seed."""
        return {key: value for key, value in self.resolved().items() if key != "ebn0_db"}


def _parse_ebn0(value: Any) -> list[float]:
    if value is None:
        raise SpecError("ebn0", "no Eb/N0 points given")
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError):
        raise SpecError("ebn0", f"expected a comma list of dB values, got {value!r}") from None


def _as_int(merged: dict, key: str, minimum: int) -> int:
    try:
        value = int(merged[key])
    except (TypeError, ValueError):
        raise SpecError(key, f"expected an integer, got {merged[key]!r}") from None
    if value < minimum:
        raise SpecError(key, f"must be >= {minimum}, got {value}")
    return value


def _as_float(merged: dict, key: str) -> float:
    try:
        return float(merged[key])
    except (TypeError, ValueError):
        raise SpecError(key, f"expected a number, got {merged[key]!r}") from None


def _same_value(key: str, flag: Any, scenario: Any) -> bool:
    """Flag and scenario values compared after parsing, so '0,1' equals [0.0, 1.0]."""
    if key == "ebn0":
        try:
            return _parse_ebn0(flag) == _parse_ebn0(scenario)
        except SpecError:
            return False
    try:
        return float(flag) == float(scenario)
    except (TypeError, ValueError):
        return str(flag).strip().lower() == str(scenario).strip().lower()


def _slug(scheme: str) -> str:
    return re.sub(r"[^A-Za-z0-9.]+", "_", scheme).strip("_")


def _resolve_scheme(merged: dict, k: int) -> tuple[str, HybridConfig | None]:
    name = str(merged.get("scheme") or "STD")
    if name.strip().upper() == MLD_SCHEME:
        m = CodeConfig.for_size(k).m
        if m > ML_MAX_MESSAGE_BITS:
            raise SpecError("k", f"MLD enumerates 2^m codewords and needs m <= {ML_MAX_MESSAGE_BITS}, got m={m}")
        return MLD_SCHEME, None

    t_max = _as_int(merged, "max_iters", 1)
    scale = _as_float(merged, "extrinsic_scale")
    try:
        base = parse_scheme(name, t_max=t_max, extrinsic_scale=scale)
    except ValueError as e:
        raise SpecError("scheme", str(e)) from None

    overrides: dict[str, Any] = {}
    for option, attr in _COMPONENTS.items():
        value = merged.get(option)
        if value is None:
            continue
        if option == "eta":
            value = _as_float(merged, "eta")
            if not 0.0 <= value <= 1.0:
                raise SpecError("eta", f"must be in [0, 1], got {value}")
        elif option == "osd_start_iter":
            value = base.t_max if str(value).upper() == "T" else _as_int(merged, option, 1)
        elif option == "osd_order":
            value = _as_int(merged, option, 0)
        elif option == "accum_alpha":
            value = _as_float(merged, option)
        overrides[attr] = value
    try:
        cfg = replace(base, **overrides)
    except ValueError as e:
        raise SpecError("scheme", str(e)) from None
    return scheme_name(cfg), cfg


def _check_writable(out: Path):
    if out.is_dir():
        raise SpecError("out", f"output path {out} is a directory")
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
    except OSError:
        raise SpecError("out", f"cannot create directory for {out}") from None
    if not os.access(out.parent, os.W_OK) or (out.exists() and not os.access(out, os.W_OK)):
        raise SpecError("out", f"output path {out} is not writable")


def parse_spec(
    options: dict[str, Any],
    config_file: str | None = None,
    explicit: set[str] | None = None,
    defaults: dict[str, Any] | None = None,
) -> SweepSpec:
    """Merge defaults, flags and an optional scenario file into a SweepSpec.

    `explicit` lists the options the user passed on the command line; when a
    scenario file sets one of them to a different value the file wins and a
    warning is recorded.
    """
    merged = dict(DEFAULTS if defaults is None else defaults)
    merged.update({key: value for key, value in options.items() if value is not None})
    warnings = []
    if config_file:
        for key, value in load_scenario(config_file).items():
            if explicit and key in explicit and options.get(key) is not None \
                    and not _same_value(key, options[key], value):
                warnings.append(f"{key}: scenario file value {value!r} overrides flag value {options[key]!r}")
            merged[key] = value

    if merged.get("k") is None:
        raise SpecError("k", "code block size is required")
    k = _as_int(merged, "k", 1)
    try:
        code = CodeConfig.for_size(k)
    except ValueError as e:
        raise SpecError("k", str(e)) from None

    scheme, hybrid = _resolve_scheme(merged, code.k)
    fmt = str(merged.get("format", "csv")).lower()
    if fmt not in FORMATS:
        raise SpecError("format", f"expected one of {FORMATS}, got {fmt!r}")
    stop = StopRule(
        max_frames=_as_int(merged, "frames_max", 1),
        min_frame_errors=_as_int(merged, "errors_min", 1),
    )
    ebn0 = _parse_ebn0(merged.get("ebn0"))
    seed = _as_int(merged, "seed", 0)
    workers = _as_int(merged, "workers", 1)

    out = merged.get("out")
    out = Path(out) if out else Path(merged.get("results_dir", "results")) / f"k{k}_{_slug(scheme)}.{fmt}"
    _check_writable(out)

    return SweepSpec(
        k=k,
        scheme=scheme,
        hybrid=hybrid,
        ebn0=ebn0,
        stop=stop,
        seed=seed,
        out=out,
        fmt=fmt,
        workers=workers,
        warnings=warnings,
    )


def _simulate(args: tuple) -> SweepPoint:
    scheme, k, ebn0_db, stop, seed = args
    return run_point(scheme, CodeConfig.for_size(k), ebn0_db, stop, seed)


class SweepRunner:
    def __init__(self, spec: SweepSpec):
        self.spec = spec
        self.progress_file = spec.out.with_name(spec.out.name + ".progress.jsonl")

    def _load_progress(self) -> dict[int, SweepPoint]:
        """Completed points of an interrupted run with the same spec."""
        done: dict[int, SweepPoint] = {}
        if not self.progress_file.exists():
            return done
        spec = self.spec
        key = spec.resume_key()
        for line in self.progress_file.read_text().split("\n"):
            try:
                r = json.loads(line)
                i = r["index"]
                point = SweepPoint.from_dict(r["point"])
            except (ValueError, KeyError, TypeError):
                # blank, or cut short by an interrupted append
                continue
            if not isinstance(i, int) or not 0 <= i < len(spec.ebn0):
                continue
            if r.get("config") == key and point.seed == derive_seed(spec.seed, i) \
                    and point.ebn0_db == spec.ebn0[i]:
                done[i] = point
        return done

    def _pending(self, done: dict[int, SweepPoint]) -> Iterator[SweepPoint]:
        spec = self.spec
        jobs = [
            (spec.decoder_scheme, spec.k, ebn0, spec.stop, derive_seed(spec.seed, i))
            for i, ebn0 in enumerate(spec.ebn0) if i not in done
        ]
        if spec.workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=spec.workers) as pool:
                yield from pool.map(_simulate, jobs)
        else:
            yield from map(_simulate, jobs)

    def run(self) -> list[SweepPoint]:
        """Run every Eb/N0 point, writing results in Eb/N0 order as they complete."""
        spec = self.spec
        for warning in spec.warnings:
            console.print(f"[yellow]Warning: {warning}[/yellow]")

        done = self._load_progress()
        if done:
            console.print(f"[yellow]Resuming: {len(done)} points already completed[/yellow]")
        console.print(
            f"\n[bold]{spec.scheme}, k={spec.k}: {len(spec.ebn0)} Eb/N0 points "
            f"({len(done)} cached) -> {spec.out}[/bold]\n"
        )

        writer = ResultWriter(spec.out, spec.fmt, spec.resolved())
        key = spec.resume_key()
        computed = self._pending(done)
        with Progress(SpinnerColumn(), TextColumn("[progress.description]{task.description}"),
                      BarColumn(), TextColumn("{task.completed}/{task.total}")) as progress_bar:
            task = progress_bar.add_task("Simulating...", total=len(spec.ebn0), completed=0)
            for i, ebn0 in enumerate(spec.ebn0):
                progress_bar.update(task, description=f"Eb/N0 = {ebn0:g} dB")
                if i in done:
                    point = done[i]
                else:
                    point = next(computed)
                    record = {"index": i, "config": key, "point": point.to_dict()}
                    with open(self.progress_file, "a") as f:
                        f.write(json.dumps(record) + "\n")
                writer.add(point)
                console.print(
                    f"  [green]✓[/green] {ebn0:g} dB: FER {point.fer:.3e}, UER {point.uer:.3e} "
                    f"({point.frame_errors} errors / {point.frames_run} frames)"
                )
                progress_bar.advance(task)

        if self.progress_file.exists():
            self.progress_file.unlink()
        console.print(summary_table(writer.points, f"{spec.scheme} (k={spec.k})"))
        return writer.points


def run_sweep(spec: SweepSpec) -> list[SweepPoint]:
    return SweepRunner(spec).run()
