"""Command-line interface: evolve, tdhf, prep, shadows, cost.

Each run resolves its parameters (flags > config file > defaults),
executes one module pipeline, and writes a JSON manifest next to every
output file recording the resolved parameters, master seed, tool
version, and input/output digests. Re-running `fqlab --manifest m.json`
reproduces byte-identical outputs.
"""

import argparse
import csv
import hashlib
import json
import sys

import numpy as np

from . import __version__
from .costmodel import CostQuery, cost_report, regime_table
from .errors import NumericalAssumptionError, UsageError, ValidationError
from .grids import GridSpec
from .hamiltonian import (
    CoulombKernel,
    EvolutionPlan,
    NuclearConfig,
    evolve,
    kinetic_phase_table,
)
from .meanfield import (
    GridIntegrals,
    OccupiedOrbitals,
    TdhfPlan,
    evolve_tdhf,
)
from .shadows import (
    EstimatorConfig,
    RestrictedIndexSet,
    collect_shadows,
    estimate_krdm_element,
    gather_outcome_rows,
    required_samples,
    single_shot_values,
    variance_bound,
)
from .states import (
    FirstQuantizedState,
    exact_krdm_element,
    load_state,
    save_state,
    slater_oracle,
)
from .stateprep import prepare_slater, toffoli_count
from .grids import grid_dft_matrix


def _fmt(x) -> str:
    """Floats serialized with 17 significant digits."""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            h.update(block)
    return h.hexdigest()


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_manifest(subcommand, params, seed, inputs, outputs) -> None:
    manifest = {
        "tool_version": __version__,
        "subcommand": subcommand,
        "parameters": params,
        "seed": seed,
        "inputs": {str(p): _digest(p) for p in inputs},
        "outputs": {str(p): _digest(p) for p in outputs},
    }
    for out in outputs:
        with open(f"{out}.manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _load_nuclei(path, dim) -> NuclearConfig:
    """One nucleus per line: charge x [y z]; # starts a comment."""
    positions, charges = [], []
    with open(path) as fh:
        for line in fh:
            line = line.split("#")[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != dim + 1:
                raise UsageError(
                    f"nuclei line {line!r} needs charge + {dim} coordinates")
            charges.append(float(parts[0]))
            positions.append([float(v) for v in parts[1:]])
    if not charges:
        return NuclearConfig.empty(dim)
    return NuclearConfig(np.array(positions), np.array(charges))


def _load_coeffs(path) -> np.ndarray:
    """CSV with N rows and 2*eta columns (re, im per orbital)."""
    raw = np.loadtxt(path, delimiter=",", ndmin=2)
    if raw.shape[1] % 2 != 0:
        raise UsageError("coefficient CSV must have re,im column pairs")
    return raw[:, 0::2] + 1j * raw[:, 1::2]


def _lowest_momentum_slater(grid: GridSpec, eta: int) -> FirstQuantizedState:
    """Slater determinant of the eta lowest-|k| plane waves (index tiebreak)."""
    table = kinetic_phase_table(grid)
    order = np.lexsort((np.arange(table.size), table))
    dft = grid_dft_matrix(grid)
    orbitals = dft.conj().T[:, order[:eta]]  # plane waves in position basis
    return slater_oracle(orbitals, grid=grid)


# -- subcommands --------------------------------------------------------------


# argparse dest names that differ from the parameter-map keys
_DEST_ALIASES = {"in": "in_", "ledger-out": "ledger_out",
                 "dump-samples": "dump_samples", "alpha-range": "alpha_range"}


def _resolved(args, config, keys):
    out = {}
    for key, default in keys.items():
        dest = _DEST_ALIASES.get(key, key.replace("-", "_"))
        flag = getattr(args, dest, None)
        if flag is not None:
            out[key] = flag
        elif key in config:
            out[key] = config[key]
        else:
            out[key] = default
    missing = [k for k, v in out.items() if v is None]
    if missing:
        raise UsageError(f"missing required parameters: {', '.join(missing)}")
    return out


def _kernel(soften) -> CoulombKernel:
    return CoulombKernel(softening=float(soften or 0.0))


def _cmd_evolve(args, config) -> int:
    p = _resolved(args, config, {
        "dim": 3, "points": None, "omega": None, "eta": None,
        "nuclei": "", "soften": 0.0, "time": None, "steps": None,
        "order": 2, "seed": 0, "in": "", "out": None})
    grid = GridSpec(dim=int(p["dim"]), points_per_axis=int(p["points"]),
                    cell_volume=float(p["omega"]))
    nuclei = (_load_nuclei(p["nuclei"], grid.dim) if p["nuclei"]
              else NuclearConfig.empty(grid.dim))
    kernel = _kernel(p["soften"])
    inputs = []
    if p["in"]:
        state = load_state(p["in"])
        inputs.append(p["in"])
    else:
        state = _lowest_momentum_slater(grid, int(p["eta"]))
    plan = EvolutionPlan(total_time=float(p["time"]), steps=int(p["steps"]),
                         order=int(p["order"]))
    final = evolve(state, plan, nuclei, kernel)
    save_state(p["out"], final)
    if p["nuclei"]:
        inputs.append(p["nuclei"])
    _write_manifest("evolve", p, int(p["seed"]), inputs, [p["out"]])
    return 0


def _cmd_tdhf(args, config) -> int:
    p = _resolved(args, config, {
        "dim": 1, "points": None, "omega": None, "eta": None,
        "nuclei": "", "soften": 0.0, "time": None, "steps": None,
        "scheme": "exponential-midpoint", "observables": "energy",
        "coeffs": "", "out": None})
    grid = GridSpec(dim=int(p["dim"]), points_per_axis=int(p["points"]),
                    cell_volume=float(p["omega"]))
    nuclei = (_load_nuclei(p["nuclei"], grid.dim) if p["nuclei"]
              else NuclearConfig.empty(grid.dim))
    integrals = GridIntegrals.from_grid(grid, nuclei, _kernel(p["soften"]))
    inputs = [path for path in (p["nuclei"], p["coeffs"]) if path]
    if p["coeffs"]:
        coeffs = _load_coeffs(p["coeffs"])
    else:
        # core-Hamiltonian guess: lowest eigenvectors of h
        _, vecs = np.linalg.eigh(integrals.h)
        coeffs = vecs[:, :int(p["eta"])]
    orbitals = OccupiedOrbitals(coeffs, grid)
    wanted = [w.strip() for w in str(p["observables"]).split(",") if w.strip()]
    unknown = set(wanted) - {"energy", "rdm-diag"}
    if unknown:
        raise UsageError(f"unknown observables: {sorted(unknown)}")
    plan = TdhfPlan(total_time=float(p["time"]), steps=int(p["steps"]),
                    scheme=p["scheme"])
    traj = evolve_tdhf(orbitals, integrals, plan,
                       record_rdm_diag="rdm-diag" in wanted, keep_history=False)
    header = ["step", "time", "energy"]
    if "rdm-diag" in wanted:
        header += [f"rdm_{i}" for i in range(grid.total_points)]
    rows = []
    for step in range(len(traj.times)):
        row = [step, float(traj.times[step]), float(traj.energies[step])]
        if "rdm-diag" in wanted:
            row += [float(v) for v in traj.rdm_diagonals[step]]
        rows.append(row)
    _write_csv(p["out"], header, rows)
    _write_manifest("tdhf", p, 0, inputs, [p["out"]])
    return 0


def _cmd_prep(args, config) -> int:
    p = _resolved(args, config, {
        "coeffs": None, "verify": False, "ledger-out": ""})
    coeffs = _load_coeffs(p["coeffs"])
    n, eta = coeffs.shape
    result = prepare_slater(coeffs, validate=bool(p["verify"]))
    outputs = []
    if p["ledger-out"]:
        rows = sorted(result.ledger.counts.items())
        rows.append(("total", result.ledger.total))
        _write_csv(p["ledger-out"], ["primitive", "toffolis"], rows)
        outputs.append(p["ledger-out"])
    print(f"prepared N={n} eta={eta}: ledger total {result.ledger.total} "
          f"(closed form {toffoli_count(n, eta, 'improved')})")
    if p["verify"]:
        oracle = slater_oracle(coeffs, n_orbitals=n)
        overlap = abs(result.state.overlap(oracle))
        ledger_ok = result.ledger.total == toffoli_count(n, eta, "improved")
        print(f"oracle overlap modulus: {overlap:.12f}")
        print(f"ledger matches closed form: {ledger_ok}")
        if abs(overlap - 1.0) > 1e-9 or not ledger_ok:
            raise NumericalAssumptionError("preparation verification failed")
    if outputs:
        _write_manifest("prep", p, 0, [p["coeffs"]], outputs)
    return 0


def _parse_elements(spec_text, n_orbitals, k):
    if spec_text == "all-1rdm":
        if k != 1:
            raise UsageError("all-1rdm requires k=1")
        return [((i,), (j,)) for i in range(n_orbitals) for j in range(n_orbitals)]
    elements = []
    with open(spec_text) as fh:
        for row in csv.reader(fh):
            vals = [int(v) for v in row if v.strip() != ""]
            if len(vals) != 2 * k:
                raise UsageError(f"element row {row} needs 2k = {2 * k} indices")
            elements.append((tuple(vals[:k]), tuple(vals[k:])))
    return elements


def _cmd_shadows(args, config) -> int:
    p = _resolved(args, config, {
        "in": None, "k": 1, "epsilon": None, "delta": None,
        "samples": "auto", "seed": 0, "elements": "all-1rdm",
        "out": None, "dump-samples": ""})
    state = load_state(p["in"])
    if not state.is_antisymmetric():
        raise ValidationError("shadow protocol expects an antisymmetric state")
    k = int(p["k"])
    eps, delta = float(p["epsilon"]), float(p["delta"])
    if str(p["samples"]) == "auto":
        m = required_samples(state.n_orbitals, k, state.eta, eps, delta)
    else:
        m = int(p["samples"])
    config_est = EstimatorConfig.from_sample_count(k, eps, delta, m)
    samples = collect_shadows(state, m, int(p["seed"]),
                              threads=int(getattr(args, "threads", 1) or 1))
    elements = _parse_elements(str(p["elements"]), state.n_orbitals, k)
    registers = sorted({x for tup in RestrictedIndexSet(state.eta, k).tuples()
                        for x in tup})
    shared_rows = gather_outcome_rows(samples, registers)
    rows = []
    for bra, ket in elements:
        est = estimate_krdm_element(samples, config_est, state.eta, bra, ket,
                                    rows=shared_rows)
        rows.append([";".join(map(str, bra)), ";".join(map(str, ket)),
                     est.real, est.imag, config_est.groups,
                     config_est.group_size])
    _write_csv(p["out"], ["i", "j", "re", "im", "groups", "group_size"], rows)
    outputs = [p["out"]]
    if p["dump-samples"]:
        sample_rows = []
        for s in samples:
            sample_rows.append(["|".join(c.key for c in s.cliffords),
                                "|".join(str(b) for b in s.outcomes)])
        _write_csv(p["dump-samples"], ["cliffords", "outcomes"], sample_rows)
        outputs.append(p["dump-samples"])
    inputs = [p["in"]] + ([p["elements"]] if p["elements"] != "all-1rdm" else [])
    _write_manifest("shadows", p, int(p["seed"]), inputs, outputs)
    return 0


def _cmd_cost(args, config) -> int:
    p = _resolved(args, config, {"alpha-range": "", "query": "", "out": ""})
    if p["alpha-range"]:
        try:
            lo, hi, step = (float(v) for v in str(p["alpha-range"]).split(":"))
        except Exception as exc:
            raise UsageError("--alpha-range must be lo:hi:step") from exc
        count = int(round((hi - lo) / step)) + 1
        alphas = [lo + i * step for i in range(count) if lo + i * step <= hi + 1e-12]
        rows = regime_table(alphas)
        if not p["out"]:
            raise UsageError("--alpha-range needs --out")
        _write_csv(p["out"],
                   ["alpha", "beta_classical", "beta_quantum", "speedup",
                    "optimal_quantum", "optimal_classical_term"],
                   [[r["alpha"], r["beta_classical"], r["beta_quantum"],
                     r["speedup"], r["optimal_quantum"],
                     r["optimal_classical_term"]] for r in rows])
        _write_manifest("cost", p, 0, [], [p["out"]])
        return 0
    if p["query"]:
        vals = [v.strip() for v in str(p["query"]).split(",")]
        if len(vals) < 4:
            raise UsageError("--query needs at least N,eta,t,eps")
        names = ["n_basis", "eta", "time", "epsilon", "occupied_orbitals",
                 "time_points", "observable_norm", "sampling_cost", "k_body"]
        kwargs = {}
        for name, val in zip(names, vals):
            if val == "":
                continue
            kwargs[name] = int(val) if name == "k_body" else float(val)
        report = cost_report(CostQuery(**kwargs))
        text = json.dumps(report, indent=2, sort_keys=True, default=str)
        if p["out"]:
            with open(p["out"], "w") as fh:
                fh.write(text + "\n")
            _write_manifest("cost", p, 0, [], [p["out"]])
        else:
            print(text)
        return 0
    raise UsageError("cost needs --alpha-range or --query")


# -- shadow experiment pipeline ------------------------------------------------


def pipeline_shadow_experiment(config: dict) -> dict:
    """Prepare, evolve, measure, estimate, and compare against the oracle.

    Config keys: grid {dim, points, omega}, coeffs (N x eta complex array
    or CSV path), evolution {time, steps, order, soften} (optional),
    estimator {k, epsilon, delta, samples}, elements (list of (i, j)
    tuples or "all-1rdm"), seed.
    """
    gridc = config["grid"]
    grid = GridSpec(dim=int(gridc["dim"]), points_per_axis=int(gridc["points"]),
                    cell_volume=float(gridc["omega"]))
    coeffs = config["coeffs"]
    if isinstance(coeffs, str):
        coeffs = _load_coeffs(coeffs)
    coeffs = np.asarray(coeffs, dtype=complex)
    prep = prepare_slater(coeffs, grid=grid)
    state = prep.state
    evo = config.get("evolution")
    if evo and float(evo.get("time", 0.0)) != 0.0:
        nuclei = evo.get("nuclei") or NuclearConfig.empty(grid.dim)
        kernel = _kernel(evo.get("soften", 0.0))
        plan = EvolutionPlan(total_time=float(evo["time"]),
                             steps=int(evo["steps"]),
                             order=int(evo.get("order", 2)))
        state = evolve(state, plan, nuclei, kernel)
    est = config["estimator"]
    k = int(est.get("k", 1))
    eps, delta = float(est["epsilon"]), float(est["delta"])
    seed = int(config.get("seed", 0))
    m = est.get("samples", "auto")
    if m == "auto":
        m = required_samples(state.n_orbitals, k, state.eta, eps, delta)
    m = int(m)
    cfg = EstimatorConfig.from_sample_count(k, eps, delta, m)
    samples = collect_shadows(state, m, seed, threads=int(config.get("threads", 1)))
    elements = config.get("elements", "all-1rdm")
    if elements == "all-1rdm":
        elements = [((i,), (j,)) for i in range(state.n_orbitals)
                    for j in range(state.n_orbitals)]
    bound = variance_bound(k, state.eta)
    registers = sorted({x for tup in RestrictedIndexSet(state.eta, k).tuples()
                        for x in tup})
    shared_rows = gather_outcome_rows(samples, registers)
    results = []
    worst_var = 0.0
    for bra, ket in elements:
        estimate = estimate_krdm_element(samples, cfg, state.eta, bra, ket,
                                         rows=shared_rows)
        values = single_shot_values(samples, state.eta, k, bra, ket,
                                    rows=shared_rows)
        emp_var = float(np.mean(np.abs(values) ** 2) - np.abs(np.mean(values)) ** 2)
        worst_var = max(worst_var, emp_var)
        entry = {"i": bra, "j": ket, "estimate": estimate,
                 "empirical_variance": emp_var}
        if state.n_orbitals ** state.eta <= 2 ** 16:
            entry["exact"] = exact_krdm_element(state, bra, ket)
            entry["error"] = abs(estimate - entry["exact"])
        results.append(entry)
    report = {
        "samples": m,
        "groups": cfg.groups,
        "group_size": cfg.group_size,
        "variance_bound": bound,
        "worst_empirical_variance": worst_var,
        "within_variance_bound": worst_var <= bound,
        "elements": results,
    }
    if all("error" in r for r in results):
        report["max_error"] = max(r["error"] for r in results)
        report["within_epsilon"] = report["max_error"] <= eps
    return report


# -- dispatcher ----------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fqlab",
        description="First-quantized electron-dynamics laboratory")
    parser.add_argument("--manifest", help="replay a recorded run")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--config", help="JSON file with defaults")
    sub = parser.add_subparsers(dest="subcommand")

    ev = sub.add_parser("evolve", help="split-operator Trotter evolution")
    ev.add_argument("--dim", type=int)
    ev.add_argument("--points", type=int)
    ev.add_argument("--omega", type=float)
    ev.add_argument("--eta", type=int)
    ev.add_argument("--nuclei")
    ev.add_argument("--soften", type=float)
    ev.add_argument("--time", type=float)
    ev.add_argument("--steps", type=int)
    ev.add_argument("--order", type=int)
    ev.add_argument("--seed", type=int)
    ev.add_argument("--in", dest="in_", help="input state snapshot")
    ev.add_argument("--out")

    td = sub.add_parser("tdhf", help="real-time mean-field propagation")
    td.add_argument("--dim", type=int)
    td.add_argument("--points", type=int)
    td.add_argument("--omega", type=float)
    td.add_argument("--eta", type=int)
    td.add_argument("--nuclei")
    td.add_argument("--soften", type=float)
    td.add_argument("--time", type=float)
    td.add_argument("--steps", type=int)
    td.add_argument("--scheme")
    td.add_argument("--observables")
    td.add_argument("--coeffs")
    td.add_argument("--out")

    pr = sub.add_parser("prep", help="Slater preparation with gate ledger")
    pr.add_argument("--coeffs")
    pr.add_argument("--verify", action="store_const", const=True)
    pr.add_argument("--ledger-out", dest="ledger_out")

    sh = sub.add_parser("shadows", help="classical-shadow RDM estimation")
    sh.add_argument("--in", dest="in_", help="input state snapshot")
    sh.add_argument("--k", type=int)
    sh.add_argument("--epsilon", type=float)
    sh.add_argument("--delta", type=float)
    sh.add_argument("--samples")
    sh.add_argument("--seed", type=int)
    sh.add_argument("--elements")
    sh.add_argument("--out")
    sh.add_argument("--dump-samples", dest="dump_samples")

    co = sub.add_parser("cost", help="asymptotic cost and speedup tables")
    co.add_argument("--alpha-range", dest="alpha_range")
    co.add_argument("--query")
    co.add_argument("--out")
    return parser


_HANDLERS = {
    "evolve": _cmd_evolve,
    "tdhf": _cmd_tdhf,
    "prep": _cmd_prep,
    "shadows": _cmd_shadows,
    "cost": _cmd_cost,
}

def dispatch(argv) -> int:
    """Run one command; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.manifest:
        with open(args.manifest) as fh:
            recorded = json.load(fh)
        sub = recorded["subcommand"]
        if sub not in _HANDLERS:
            print(f"manifest names unknown subcommand {sub!r}", file=sys.stderr)
            return 2
        replay_args = argparse.Namespace(threads=args.threads)
        try:
            return _HANDLERS[sub](replay_args, recorded["parameters"])
        except ValidationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        except NumericalAssumptionError as exc:
            print(f"numerical assumption failed: {exc}", file=sys.stderr)
            return 3
    if not args.subcommand:
        parser.print_usage(sys.stderr)
        return 2
    config = {}
    if args.config:
        with open(args.config) as fh:
            config = json.load(fh)
    try:
        return _HANDLERS[args.subcommand](args, config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalAssumptionError as exc:
        print(f"numerical assumption failed: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
