"""Scenario files: parsing, validation and execution.

Scenarios are TOML documents (extension ``.scn``). Complex numbers are written
as ``[re, im]`` pairs and alignment entries as ``[modulus, phase]`` pairs.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .analytic import optimal_initial_state, steady_dicke, steady_general
from .baths import BathSpec, ModulationSpec, effective_boltzmann, sideband_rates
from .dynamics import check_density_matrix, darkness, evolve, integral_of_motion, steady_state
from .errors import InvalidConfig, IoError, NonConvergent, SchemaError
from .geometry import (
    DipoleConfig,
    build_collective_basis,
    dark_projector,
    decompose_domains,
    validate_config,
)
from .liouville import ThreeLevelODE, ThreeLevelParams, build_dicke_liouvillian, build_total_liouvillian
from .thermo import (
    DickeMachine,
    Machine,
    critical_frequency,
    dicke_ratio,
    dicke_report,
    heat_currents,
    multilevel_ratio,
    table1_limits,
)

MODES = ("evolve", "steady", "report", "sweep")
GRIDS = ("machine", "neff_ratio", "dicke_ratio", "initial_state_surface", "table1")
SWEEP_HEADER = ["omega", "T_c", "T_h", "J_c", "J_h", "W_dot", "eta_or_cop", "ratio", "beta_eff"]


@dataclass
class Scenario:
    name: str
    kind: str
    n: int
    cfg: DipoleConfig | None
    baths: tuple
    mod: ModulationSpec
    omega0: float
    rho0: np.ndarray | None
    dicke_darkness: float
    detuning: float
    run: dict
    grid: dict = field(default_factory=dict)

    @property
    def mode(self) -> str:
        return self.run["mode"]

    @property
    def output(self) -> str:
        return self.run.get("output", f"{self.name}.csv")

    def machine(self, baths=None, mod=None) -> Machine:
        return Machine(self.cfg, tuple(baths or self.baths), mod or self.mod, self.omega0, self.rho0)

    def dicke(self, baths=None, mod=None) -> DickeMachine:
        return DickeMachine(self.n, tuple(baths or self.baths), mod or self.mod, self.omega0, self.dicke_darkness)


# parsing --------------------------------------------------------------------


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise SchemaError(f"missing required key '{where}.{key}'")
    return table[key]


def _complex(pair, where):
    if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(v, (int, float)) for v in pair)):
        raise SchemaError(f"{where}: complex numbers are written as [re, im]")
    return complex(pair[0], pair[1])


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where} must be a number")
    return float(value)


def _parse_system(tbl: dict):
    kind = tbl.get("kind", "multilevel")
    if kind not in ("multilevel", "dicke"):
        raise SchemaError(f"system.kind must be multilevel or dicke, got {kind!r}")
    n = _require(tbl, "n", "system")
    if not isinstance(n, int) or n < 2 - (kind == "dicke"):
        raise SchemaError("system.n must be an integer >= 2 (>= 1 atoms for dicke)")
    detuning = _number(tbl.get("detuning", 0.0), "system.detuning")
    if kind == "dicke":
        dk = _number(tbl.get("darkness", 0.0), "system.darkness")
        if not 0.0 <= dk <= 1.0:
            raise SchemaError("system.darkness must lie in [0, 1]")
        return kind, n, None, dk, detuning
    if "dipole_vectors" in tbl:
        vecs = [[_complex(c, "system.dipole_vectors") for c in v] for v in tbl["dipole_vectors"]]
        cfg = DipoleConfig.from_vectors(np.array(vecs))
    elif "alphas" in tbl and "alignment" in tbl:
        alphas = [_number(a, "system.alphas") for a in tbl["alphas"]]
        try:
            pairs = np.array(tbl["alignment"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"system.alignment: {exc}") from exc
        if pairs.ndim != 3 or pairs.shape[2] != 2:
            raise SchemaError("system.alignment must be a matrix of [modulus, phase] pairs")
        cfg = DipoleConfig.from_polar(alphas, pairs[..., 0], pairs[..., 1])
    else:
        raise SchemaError("system needs either dipole_vectors or alphas + alignment")
    if cfg.n_levels != n:
        raise SchemaError(f"system.n = {n} but the geometry describes {cfg.n_levels} levels")
    report = validate_config(cfg)
    if not report.ok:
        raise InvalidConfig("; ".join(report.failures))
    return kind, n, cfg, 0.0, detuning


def _parse_bath(label: str, tbl: dict) -> BathSpec:
    where = f"baths.{label}"
    kw = {"temperature": _number(_require(tbl, "temperature", where), f"{where}.temperature")}
    kw["model"] = tbl.get("model", "flat")
    if "band" in tbl:
        band = tbl["band"]
        if not (isinstance(band, list) and len(band) == 2):
            raise SchemaError(f"{where}.band must be [lo, hi]")
        hi = band[1]
        kw["band"] = (_number(band[0], where), math.inf if hi in ("inf", None) else _number(hi, where))
    for key in ("gamma0", "kappa", "cutoff"):
        if key in tbl:
            kw[key] = _number(tbl[key], f"{where}.{key}")
    if "table" in tbl:
        kw["table"] = tuple(tuple(float(v) for v in row) for row in tbl["table"])
    return BathSpec(label, **kw)


def _parse_modulation(tbl: dict) -> ModulationSpec:
    kind = tbl.get("type", "none")
    if kind == "none":
        return ModulationSpec.none()
    rate = _number(_require(tbl, "omega", "modulation"), "modulation.omega")
    if kind == "two_sideband":
        return ModulationSpec.two_sideband(rate)
    if kind == "table":
        return ModulationSpec.from_pairs(rate, _require(tbl, "weights", "modulation"))
    raise SchemaError(f"modulation.type must be none, two_sideband or table, got {kind!r}")


def _parse_initial(tbl: dict, cfg: DipoleConfig) -> np.ndarray:
    n = cfg.n_levels
    if "custom" in tbl:
        rho = np.array([[_complex(c, "initial_state.custom") for c in row] for row in tbl["custom"]])
        return check_density_matrix(rho, n)
    if "amplitudes" in tbl:
        psi = np.array([_complex(c, "initial_state.amplitudes") for c in tbl["amplitudes"]])
        if psi.shape != (n,):
            raise SchemaError(f"initial_state.amplitudes needs {n} entries")
        psi = psi / np.linalg.norm(psi)
        return np.outer(psi, psi.conj())
    named = tbl.get("named", "ground")
    if named == "ground":
        rho = np.zeros((n, n), dtype=complex)
        rho[0, 0] = 1.0
        return rho
    if named == "optimal":
        return optimal_initial_state(cfg, _number(_require(tbl, "rho00", "initial_state"), "initial_state.rho00"))
    basis = build_collective_basis(decompose_domains(cfg), cfg)
    if named == "bright":
        cols = list(basis.bright_indices) + list(basis.lone_indices)
        v = basis.column(cols[0])
    elif named == "dark":
        darks = [basis.column(i) for i in basis.dark_indices] + list(basis.hidden_dark.T)
        if not darks:
            raise InvalidConfig("geometry has no dark state")
        v = darks[0]
    else:
        raise SchemaError(f"initial_state.named must be ground, bright, dark or optimal, got {named!r}")
    return np.outer(v, v.conj())


def _parse_run(tbl: dict) -> dict:
    run = dict(tbl)
    mode = _require(run, "mode", "run")
    if mode not in MODES:
        raise SchemaError(f"run.mode must be one of {', '.join(MODES)}")
    if mode == "evolve":
        _number(_require(run, "t_max", "run"), "run.t_max")
    if mode == "sweep":
        grid = _require(run, "grid", "run")
        if grid.get("kind") not in GRIDS:
            raise SchemaError(f"run.grid.kind must be one of {', '.join(GRIDS)}")
    return run


def load_text(text: str, name: str = "scenario") -> Scenario:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError(f"{name}: {exc}") from exc
    run = _parse_run(_require(doc, "run", "<root>"))
    grid_kind = run.get("grid", {}).get("kind")
    # closed-form grids need no physical system
    formula_only = run["mode"] == "sweep" and grid_kind in ("neff_ratio", "dicke_ratio", "table1")
    if formula_only:
        return Scenario(name, "formula", 0, None, (), ModulationSpec.none(), 1.0, None, 0.0, 0.0, run, run["grid"])

    kind, n, cfg, dk, detuning = _parse_system(_require(doc, "system", "<root>"))
    bath_tbl = _require(doc, "baths", "<root>")
    baths = tuple(_parse_bath(lbl, bath_tbl[lbl]) for lbl in ("cold", "hot") if lbl in bath_tbl)
    if not baths:
        raise SchemaError("at least one of baths.cold, baths.hot is required")
    mod = _parse_modulation(doc.get("modulation", {}))
    omega0 = _number(doc.get("omega0", 1.0), "omega0")
    if not omega0 > 0:
        raise InvalidConfig("omega0 must be positive")
    rho0 = None if kind == "dicke" else _parse_initial(doc.get("initial_state", {}), cfg)
    if run["mode"] in ("report", "sweep") and len(baths) != 2:
        raise SchemaError(f"run.mode = {run['mode']} needs both a cold and a hot bath")
    if kind == "dicke" and run["mode"] == "evolve":
        raise SchemaError("evolve runs are available for multilevel systems only")
    if detuning and (kind != "multilevel" or n != 3 or run["mode"] != "evolve"):
        raise SchemaError("system.detuning is supported for three-level evolve runs only")
    return Scenario(name, kind, n, cfg, baths, mod, omega0, rho0, dk, detuning, run, run.get("grid", {}))


def load(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    return load_text(text, path.stem)


def builtin_dir():
    return resources.files("qheat") / "scenarios"


def list_builtin() -> list:
    return sorted(p.name[:-4] for p in builtin_dir().iterdir() if p.name.endswith(".scn"))


def resolve(ref: str) -> Path:
    """A path on disk, or the name of a bundled scenario."""
    path = Path(ref)
    if path.exists():
        return path
    name = ref[:-4] if ref.endswith(".scn") else ref
    bundled = builtin_dir() / f"{name}.scn"
    if bundled.is_file():
        return Path(str(bundled))
    raise IoError(f"no scenario file or bundled scenario named {ref!r}")


# execution ------------------------------------------------------------------


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.15g" % float(x)


@dataclass
class Table:
    header: list
    rows: list
    kind: str
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()


def _tolerances(run: dict) -> dict:
    return {k: float(run[k]) for k in ("rtol", "atol") if k in run}


def _trajectory_header(n: int) -> list:
    head = ["t"] + [f"rho{i}{i}.re" for i in range(n)]
    for i in range(n):
        for j in range(i):
            head += [f"rho{i}{j}.re", f"rho{i}{j}.im"]
    return head + ["I", "darkness"]


def run_evolve(sc: Scenario) -> Table:
    cfg, n = sc.cfg, sc.n
    pd = dark_projector(build_collective_basis(decompose_domains(cfg), cfg))
    t_max = float(sc.run["t_max"])
    points = int(sc.run.get("t_points", 201))
    kw = _tolerances(sc.run)
    if sc.detuning:
        # all sidebands share the same operators, so the three-level ODE sees summed rates
        down, up = sideband_rates(sc.baths, sc.mod, sc.omega0)
        params = ThreeLevelParams(
            alpha=float(cfg.alphas[1]),
            p=float(abs(cfg.alignment[0, 1])),
            phi=float(np.angle(cfg.alignment[0, 1])),
            G=down,
            boltzmann=up / down,
            detuning=sc.detuning,
        )
        gen = ThreeLevelODE(params)
    else:
        gen = build_total_liouvillian(cfg, sc.baths, sc.mod, sc.omega0)
    if "stationary_tol" in sc.run:
        kw["stationary_tol"] = float(sc.run["stationary_tol"])
    traj = evolve(gen, sc.rho0, t_max, n_points=points, **kw)
    rows = []
    for t, rho in zip(traj.times, traj.states):
        row = [t] + [rho[i, i].real for i in range(n)]
        for i in range(n):
            for j in range(i):
                row += [rho[i, j].real, rho[i, j].imag]
        row.append(integral_of_motion(cfg, rho) if n == 3 else None)
        row.append(darkness(rho, pd))
        rows.append(row)
    return Table(_trajectory_header(n), rows, "trajectory", {"converged": traj.converged, "residual": traj.residual, "n": n})


def run_steady(sc: Scenario) -> Table:
    boltz = effective_boltzmann(sc.baths, sc.mod, sc.omega0)
    if sc.kind == "dicke":
        gen = build_dicke_liouvillian(sc.n, sc.baths, sc.mod, sc.omega0)
        num = (1 - sc.dicke_darkness) * np.real(np.diag(steady_state(gen)))
        ana = steady_dicke(sc.n, boltz, sc.dicke_darkness)
        rows = [[j, j, num[j], 0.0, ana[j], 0.0] for j in range(sc.n + 1)]
    else:
        gen = build_total_liouvillian(sc.cfg, sc.baths, sc.mod, sc.omega0)
        num = steady_state(gen, sc.rho0)
        ana = steady_general(sc.cfg, None, None, boltz, sc.rho0).state
        rows = [[i, j, num[i, j].real, num[i, j].imag, ana[i, j].real, ana[i, j].imag] for i in range(sc.n) for j in range(sc.n)]
    return Table(["i", "j", "re", "im", "analytic_re", "analytic_im"], rows, "steady")


def _report(sc: Scenario, baths=None, mod=None, check=True):
    if sc.kind == "dicke":
        return dicke_report(sc.dicke(baths, mod), check=check)
    return heat_currents(sc.machine(baths, mod), check=check)


def _sweep_row(rate, baths, rep):
    return [rate, baths[0].temperature, baths[1].temperature, rep.J_cold, rep.J_hot, rep.W_dot, rep.eta_or_cop, rep.ratios["power"], rep.beta_eff]


def run_report(sc: Scenario) -> Table:
    rep = _report(sc, check=bool(sc.run.get("check_trace", True)))
    try:
        om = critical_frequency(sc.baths, sc.omega0)
    except Exception:
        om = None
    row = _sweep_row(sc.mod.rate, sc.baths, rep) + [rep.mode, om]
    return Table(SWEEP_HEADER + ["mode", "omega_crit"], [row], "report")


def _linspace(spec, where):
    if not (isinstance(spec, list) and len(spec) == 3):
        raise SchemaError(f"{where} must be [start, stop, count]")
    return np.linspace(float(spec[0]), float(spec[1]), int(spec[2]))


def _pmap(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def sweep_machine(sc: Scenario, threads=1) -> Table:
    g = sc.grid
    omegas = _linspace(_require(g, "omega", "run.grid"), "run.grid.omega")
    t_cold = [float(t) for t in g.get("T_c", [sc.baths[0].temperature])]
    t_hot = [float(t) for t in g.get("T_h", [sc.baths[1].temperature])]
    check = bool(g.get("check_trace", False))
    points = [(om, tc, th) for tc in t_cold for th in t_hot for om in omegas]

    def one(pt):
        om, tc, th = pt
        baths = (_with_temperature(sc.baths[0], tc), _with_temperature(sc.baths[1], th))
        mod = ModulationSpec(float(om), sc.mod.weights)
        return _sweep_row(om, baths, _report(sc, baths, mod, check=check))

    rows = _pmap(one, points, threads)
    meta = {}
    if len(t_cold) == 1 and len(t_hot) == 1:
        try:
            meta["omega_crit"] = critical_frequency(sc.baths, sc.omega0)
        except Exception:
            pass
    return Table(list(SWEEP_HEADER), rows, "machine", meta)


def _with_temperature(bath: BathSpec, t: float) -> BathSpec:
    return replace(bath, temperature=t)


def sweep_neff(sc: Scenario, threads=1) -> Table:
    g = sc.grid
    n = int(_require(g, "n", "run.grid"))
    xs = _linspace(_require(g, "x", "run.grid"), "run.grid.x")
    weight = float(g.get("total_weight", n - 1))
    cap = float(g.get("capability", 1.0))
    rows = []
    for ne in g.get("n_eff", [n, 2]):
        ne = int(ne)
        if not 2 <= ne <= n:
            raise SchemaError("run.grid.n_eff entries must lie in [2, n]")
        rows += [[x, ne, multilevel_ratio(weight, cap, ne, math.exp(-x))] for x in xs]
    return Table(["beta_eff_omega0", "n_eff", "ratio"], rows, "neff_ratio")


def sweep_dicke(sc: Scenario, threads=1) -> Table:
    g = sc.grid
    xs = _linspace(_require(g, "x", "run.grid"), "run.grid.x")
    dk = float(g.get("darkness", 0.0))
    rows = []
    for n in g.get("n_atoms", [2]):
        rows += [[x, int(n), dicke_ratio(int(n), math.exp(-x), dk)] for x in xs]
    return Table(["beta_eff_omega0", "n_atoms", "ratio"], rows, "dicke_ratio")


def surface_value(sc: Scenario, rho00: float, c: float, check=False):
    """Power enhancement for a three-level state with equal excited populations and real rho21 = c."""
    exc = 1.0 - rho00
    if abs(c) > 0.5 * exc + 1e-12:
        return None
    rho = np.zeros((3, 3), dtype=complex)
    rho[0, 0] = rho00
    rho[1, 1] = rho[2, 2] = 0.5 * exc
    rho[2, 1] = rho[1, 2] = c
    rep = heat_currents(Machine(sc.cfg, sc.baths, sc.mod, sc.omega0, rho), check=check)
    return rep.ratios["power"]


def sweep_surface(sc: Scenario, threads=1) -> Table:
    if sc.n != 3:
        raise SchemaError("initial_state_surface needs a three-level system")
    step = float(sc.grid.get("step", 0.01))
    # integer grid indices keep the cell coordinates exact and reproducible
    r_vals = [round(k * step, 12) for k in range(int(round(1 / step)) + 1)]
    c_vals = [round(-0.5 + k * step, 12) for k in range(int(round(1 / step)) + 1)]
    points = [(r, c) for r in r_vals for c in c_vals]
    vals = _pmap(lambda pt: surface_value(sc, *pt), points, threads)
    rows = [[r, c, v] for (r, c), v in zip(points, vals)]
    return Table(["rho00", "re_rho21", "ratio"], rows, "surface", {"shape": (len(r_vals), len(c_vals))})


def sweep_table1(sc: Scenario, threads=1) -> Table:
    rows = []
    for n in sc.grid.get("n", [3, 10]):
        for case, (lo, hi) in table1_limits(int(n)).items():
            rows.append([int(n), case, lo, hi])
    return Table(["N", "case", "low_T", "high_T"], rows, "table1")


SWEEPS = {
    "machine": sweep_machine,
    "neff_ratio": sweep_neff,
    "dicke_ratio": sweep_dicke,
    "initial_state_surface": sweep_surface,
    "table1": sweep_table1,
}


def execute(sc: Scenario, threads: int = 1) -> Table:
    if sc.mode == "evolve":
        return run_evolve(sc)
    if sc.mode == "steady":
        return run_steady(sc)
    if sc.mode == "report":
        return run_report(sc)
    return SWEEPS[sc.grid["kind"]](sc, threads)


def write_table(table: Table, out_dir, name: str) -> Path:
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / name
        path.write_text(table.to_csv())
    except OSError as exc:
        raise IoError(f"cannot write {name} to {out_dir}: {exc}") from exc
    return path


def check_converged(table: Table) -> None:
    if table.kind == "trajectory" and not table.meta["converged"]:
        raise NonConvergent(f"trajectory not stationary at t_max (residual {table.meta['residual']:.3g})")
