"""Run configuration: INI-format config files, flag overrides, validation.

Grammar: standard INI sections with key = value pairs; '#' and ';' start
comments.  Sections and keys are fixed (unknown ones are rejected with the
offending name); --set section.key=value overrides file values.  All
defaults are resolved at parse time and echoed into the run manifest, from
which the same RunConfig re-parses.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from .datagen import DataSpec, GaussianBump, PlaneWave, RoughRandom, ShellPacket
from .dynamics import DEALIAS_NONE, DEALIAS_TWO_THIRDS
from .field import DEFAULT_POINT_CAP
from .grid import Grid, make_grid

COMMANDS = ("evolve", "sweep", "growth", "bilinear", "scaling", "localnorm")

ENV_OUT_ROOT = "NLSLAB_OUT_ROOT"


class ConfigError(ValueError):
    """Invalid, unknown, or missing configuration; exit code 2 at the CLI."""


@dataclass(frozen=True)
class PhysicsParams:
    s: float = 0.7
    N: float | None = None
    N_list: tuple[float, ...] | None = None
    delta: float = 0.1
    b: float = 0.55


@dataclass(frozen=True)
class StepperParams:
    dt: float | None = None  # None -> phase-resolution default
    dealias: str = DEALIAS_TWO_THIRDS
    observer_stride: int = 1
    snapshot_stride: int = 0


@dataclass(frozen=True)
class ExperimentParams:
    T0: float = 4.0
    trials: int = 20
    seed: int = 7
    abort_threshold: float = 1.0
    max_cycles: int = 8
    C0: float = 1.0
    C1: float = 1.0
    k1: int = 0
    ratio_list: tuple[float, ...] = (4.0, 16.0, 64.0)
    lambda_list: tuple[int, ...] = (1, 2, 4)
    n_snapshots: int = 33
    grid_point_cap: int = DEFAULT_POINT_CAP
    refine_check: bool = True


@dataclass(frozen=True)
class RunConfig:
    command: str
    grid_dim: int
    grid_points: int
    box_length: float
    data: DataSpec
    physics: PhysicsParams
    stepper: StepperParams
    experiment: ExperimentParams
    output_dir: str

    def make_grid(self) -> Grid:
        return make_grid(self.grid_dim, self.grid_points, self.box_length)


_SCHEMA: dict[str, dict[str, str]] = {
    "run": {"command": "str"},
    "grid": {"dim": "int", "points_per_axis": "int", "box_length": "float"},
    "data": {
        "kind": "str",
        "s": "float",
        "target_hs_norm": "float",
        "seed": "int",
        "width": "float",
        "amplitude": "float",
        "center": "floats",
        "k": "ints",
        "amplitude_re": "float",
        "amplitude_im": "float",
        "shell_k": "int",
        "target_l2": "float",
    },
    "physics": {"s": "float", "N": "float", "N_list": "floats", "delta": "float", "b": "float"},
    "stepper": {
        "dt": "float_or_auto",
        "dealias": "str",
        "observer_stride": "int",
        "snapshot_stride": "int",
    },
    "experiment": {
        "T0": "float",
        "trials": "int",
        "seed": "int",
        "abort_threshold": "float",
        "max_cycles": "int",
        "C0": "float",
        "C1": "float",
        "k1": "int",
        "ratio_list": "floats",
        "lambda_list": "ints",
        "n_snapshots": "int",
        "grid_point_cap": "int",
        "refine_check": "bool",
    },
    "output": {"dir": "str"},
}

_REQUIRED = {"grid.dim", "grid.points_per_axis", "data.kind"}


def _convert(section: str, key: str, raw: str, kind: str):
    label = f"[{section}] {key}"
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "float_or_auto":
            return None if raw.lower() == "auto" else float(raw)
        if kind == "bool":
            if raw.lower() in ("true", "yes", "1", "on"):
                return True
            if raw.lower() in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if kind == "floats":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if kind == "ints":
            return tuple(int(v) for v in raw.split(",") if v.strip())
        return raw
    except ValueError as exc:
        raise ConfigError(f"{label}: cannot parse {raw!r} as {kind}") from exc


def _read_ini(text: str) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys are case-sensitive (N, N_list, T0, C0)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return {sec: dict(parser.items(sec)) for sec in parser.sections()}


def _build_data_spec(values: dict) -> DataSpec:
    kind = values.get("kind")
    if kind is None:
        raise ConfigError("[data] kind is required")
    try:
        if kind == "rough_random":
            return RoughRandom(
                s=values.get("s", 0.7),
                target_hs_norm=values.get("target_hs_norm", 1.0),
                seed=values.get("seed", 0),
            )
        if kind == "gaussian_bump":
            return GaussianBump(
                width=values.get("width", 0.5),
                amplitude=values.get("amplitude", 1.0),
                center=values.get("center"),
            )
        if kind == "plane_wave":
            if "k" not in values:
                raise ConfigError("[data] plane_wave needs k = k1,k2[,k3]")
            amp = complex(values.get("amplitude_re", 1.0), values.get("amplitude_im", 0.0))
            return PlaneWave(k=tuple(values["k"]), amplitude=amp)
        if kind == "shell_packet":
            return ShellPacket(
                shell_k=values.get("shell_k", 0),
                target_l2=values.get("target_l2", 1.0),
                seed=values.get("seed", 0),
            )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[data] {exc}") from exc
    raise ConfigError(
        f"[data] kind must be one of rough_random, gaussian_bump, plane_wave, "
        f"shell_packet; got {kind!r}"
    )


def parse_config(
    config_text: str | None = None,
    config_path: str | Path | None = None,
    overrides: list[str] | None = None,
    command: str | None = None,
    output_dir: str | None = None,
) -> RunConfig:
    """Parse and fully validate a run configuration.

    Values come from (lowest to highest precedence): built-in defaults, the
    config file, --set overrides, and the explicit command / output_dir
    arguments from the command line.
    """
    if config_text is None and config_path is not None:
        config_text = Path(config_path).read_text()
    raw = _read_ini(config_text or "")

    for key_value in overrides or []:
        if "=" not in key_value:
            raise ConfigError(f"--set expects section.key=value, got {key_value!r}")
        dotted, value = key_value.split("=", 1)
        if "." not in dotted:
            raise ConfigError(f"--set expects section.key=value, got {key_value!r}")
        sec, key = dotted.split(".", 1)
        raw.setdefault(sec.strip(), {})[key.strip()] = value.strip()

    typed: dict[str, dict] = {}
    for sec, pairs in raw.items():
        if sec not in _SCHEMA:
            raise ConfigError(f"unknown config section [{sec}]")
        typed[sec] = {}
        for key, value in pairs.items():
            if key not in _SCHEMA[sec]:
                raise ConfigError(f"unknown key {key!r} in section [{sec}]")
            typed[sec][key] = _convert(sec, key, str(value), _SCHEMA[sec][key])

    missing = sorted(
        dotted for dotted in _REQUIRED
        if typed.get(dotted.split(".")[0], {}).get(dotted.split(".")[1]) is None
    )
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing))

    cmd = command or typed.get("run", {}).get("command")
    if cmd is None:
        raise ConfigError("missing required keys: run.command (or pass a CLI command)")
    if cmd not in COMMANDS:
        raise ConfigError(f"unknown command {cmd!r}; choose from {', '.join(COMMANDS)}")
    file_cmd = typed.get("run", {}).get("command")
    if command is not None and file_cmd is not None and file_cmd != command:
        raise ConfigError(
            f"[run] command = {file_cmd!r} conflicts with the CLI command {command!r}"
        )

    gsec = typed.get("grid", {})
    dim = gsec["dim"]
    points = gsec["points_per_axis"]
    box = gsec.get("box_length", 2.0 * math.pi)
    if dim not in (2, 3):
        raise ConfigError(f"[grid] dim must be 2 or 3, got {dim}")
    if points < 8 or points & (points - 1):
        raise ConfigError(f"[grid] points_per_axis must be a power of two >= 8, got {points}")
    if not box > 0:
        raise ConfigError(f"[grid] box_length must be positive, got {box}")

    data = _build_data_spec(typed.get("data", {}))

    p = typed.get("physics", {})
    phys = PhysicsParams(
        s=p.get("s", 0.7),
        N=p.get("N"),
        N_list=p.get("N_list"),
        delta=p.get("delta", 0.1),
        b=p.get("b", 0.55),
    )
    if not 0.0 < phys.s < 1.0:
        raise ConfigError(f"[physics] s must lie in (0, 1), got {phys.s}")
    if not phys.delta > 0:
        raise ConfigError(f"[physics] delta must be positive, got {phys.delta}")

    st = typed.get("stepper", {})
    stepper = StepperParams(
        dt=st.get("dt"),
        dealias=st.get("dealias", DEALIAS_TWO_THIRDS),
        observer_stride=st.get("observer_stride", 1),
        snapshot_stride=st.get("snapshot_stride", 0),
    )
    if stepper.dealias not in (DEALIAS_TWO_THIRDS, DEALIAS_NONE):
        raise ConfigError(f"[stepper] dealias must be two_thirds or none, got {stepper.dealias!r}")
    if stepper.dt is not None and not stepper.dt > 0:
        raise ConfigError(f"[stepper] dt must be positive or auto, got {stepper.dt}")
    if stepper.observer_stride < 1:
        raise ConfigError("[stepper] observer_stride must be >= 1")
    if stepper.snapshot_stride < 0:
        raise ConfigError("[stepper] snapshot_stride must be >= 0")

    e = typed.get("experiment", {})
    exp = ExperimentParams(
        T0=e.get("T0", 4.0),
        trials=e.get("trials", 20),
        seed=e.get("seed", 7),
        abort_threshold=e.get("abort_threshold", 1.0),
        max_cycles=e.get("max_cycles", 8),
        C0=e.get("C0", 1.0),
        C1=e.get("C1", 1.0),
        k1=e.get("k1", 0),
        ratio_list=e.get("ratio_list", (4.0, 16.0, 64.0)),
        lambda_list=e.get("lambda_list", (1, 2, 4)),
        n_snapshots=e.get("n_snapshots", 33),
        grid_point_cap=e.get("grid_point_cap", DEFAULT_POINT_CAP),
        refine_check=e.get("refine_check", True),
    )
    if exp.trials < 1:
        raise ConfigError("[experiment] trials must be >= 1")
    if exp.n_snapshots < 2:
        raise ConfigError("[experiment] n_snapshots must be >= 2")
    if exp.T0 < 1:
        raise ConfigError("[experiment] T0 must be >= 1")

    if cmd == "sweep" and phys.N_list is None:
        raise ConfigError("missing required keys: physics.N_list (sweep)")
    if cmd == "localnorm" and phys.N is None:
        raise ConfigError("missing required keys: physics.N (localnorm)")
    if cmd == "scaling" and phys.N is None:
        raise ConfigError("missing required keys: physics.N (scaling)")

    out = output_dir or typed.get("output", {}).get("dir")
    if out is None:
        raise ConfigError("missing required keys: output.dir (or pass --out)")

    return RunConfig(
        command=cmd,
        grid_dim=dim,
        grid_points=points,
        box_length=float(box),
        data=data,
        physics=phys,
        stepper=stepper,
        experiment=exp,
        output_dir=str(out),
    )


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def config_echo(cfg: RunConfig) -> str:
    """Canonical INI text with every default resolved; re-parses to an equal
    RunConfig (the manifest round-trip contract)."""
    out = io.StringIO()
    out.write(f"[run]\ncommand = {cfg.command}\n\n")
    out.write(
        f"[grid]\ndim = {cfg.grid_dim}\npoints_per_axis = {cfg.grid_points}\n"
        f"box_length = {_fmt(cfg.box_length)}\n\n"
    )
    d = cfg.data
    out.write("[data]\n")
    if isinstance(d, RoughRandom):
        out.write(
            f"kind = rough_random\ns = {_fmt(d.s)}\ntarget_hs_norm = {_fmt(d.target_hs_norm)}\n"
            f"seed = {d.seed}\n"
        )
    elif isinstance(d, GaussianBump):
        out.write(f"kind = gaussian_bump\nwidth = {_fmt(d.width)}\namplitude = {_fmt(d.amplitude)}\n")
        if d.center is not None:
            out.write(f"center = {_fmt(tuple(d.center))}\n")
    elif isinstance(d, PlaneWave):
        out.write(
            f"kind = plane_wave\nk = {_fmt(tuple(int(v) for v in d.k))}\n"
            f"amplitude_re = {_fmt(d.amplitude.real)}\namplitude_im = {_fmt(d.amplitude.imag)}\n"
        )
    elif isinstance(d, ShellPacket):
        out.write(
            f"kind = shell_packet\nshell_k = {d.shell_k}\ntarget_l2 = {_fmt(d.target_l2)}\n"
            f"seed = {d.seed}\n"
        )
    out.write("\n[physics]\n")
    out.write(f"s = {_fmt(cfg.physics.s)}\n")
    if cfg.physics.N is not None:
        out.write(f"N = {_fmt(cfg.physics.N)}\n")
    if cfg.physics.N_list is not None:
        out.write(f"N_list = {_fmt(cfg.physics.N_list)}\n")
    out.write(f"delta = {_fmt(cfg.physics.delta)}\nb = {_fmt(cfg.physics.b)}\n")
    st = cfg.stepper
    out.write(
        f"\n[stepper]\ndt = {'auto' if st.dt is None else _fmt(st.dt)}\n"
        f"dealias = {st.dealias}\nobserver_stride = {st.observer_stride}\n"
        f"snapshot_stride = {st.snapshot_stride}\n"
    )
    e = cfg.experiment
    out.write(
        f"\n[experiment]\nT0 = {_fmt(e.T0)}\ntrials = {e.trials}\nseed = {e.seed}\n"
        f"abort_threshold = {_fmt(e.abort_threshold)}\nmax_cycles = {e.max_cycles}\n"
        f"C0 = {_fmt(e.C0)}\nC1 = {_fmt(e.C1)}\nk1 = {e.k1}\n"
        f"ratio_list = {_fmt(e.ratio_list)}\nlambda_list = {_fmt(e.lambda_list)}\n"
        f"n_snapshots = {e.n_snapshots}\ngrid_point_cap = {e.grid_point_cap}\n"
        f"refine_check = {_fmt(e.refine_check)}\n"
    )
    out.write(f"\n[output]\ndir = {cfg.output_dir}\n")
    return out.getvalue()
