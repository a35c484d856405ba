"""Command-line front end: one subcommand per simulated experiment.

Every run writes ``<out>/data.csv`` and ``<out>/meta.json``. Exit codes:
0 success, 2 configuration or usage error, 3 numerical failure.
"""

import argparse
import csv
import json
import os
import re
import sys
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .errors import InvalidInput, PrespaError

FIGURES = {
    "lifetime": "logical-qubit process fidelity versus storage time",
    "trajectory": "jump-count statistics of the parity-recovery unraveling",
    "rates": "multi-tone Rabi rates and comb residuals",
    "spectroscopy": "number-resolved transmon spectroscopy",
    "spectroscopy2d": "two-comb conversion spectroscopy",
    "ramsey": "cavity Ramsey under parity recovery",
    "wigner": "cavity Wigner function",
    "chi": "Fock-basis process matrix for 25 us of recovery",
    "steady": "steady-state photon distribution under recovery",
    "heating": "cavity heating rate versus mixing-tone amplitude",
    "grape": "optimal-control pulse synthesis (state preparation and decoding)",
    "budget": "error budget of the corrected qubit",
    "validate": "invariant checks",
}


def _version():
    try:
        return "v" + version("artifact")
    except PackageNotFoundError:
        return "v0+unknown"


# ---------------------------------------------------------------------------
# output helpers

def fmt(x):
    """17 significant digits, '.' separator."""
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in r])


def write_meta(path, command, cfg, summary):
    meta = {"command": command, "maps_to": FIGURES[command], "config_hash": cfgmod.config_hash(cfg),
            "seed": cfg.get("seed", 0), "version": _version(), "summary": summary, "config": cfg}
    with open(path, "w", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def parse_time_us(text):
    """'2000us', '2ms', '2000' -> microseconds."""
    m = re.fullmatch(r"\s*([0-9.eE+-]+)\s*(us|ms|ns)?\s*", str(text))
    if not m:
        raise InvalidInput(f"cannot parse time {text!r}")
    scale = {"us": 1.0, None: 1.0, "ms": 1e3, "ns": 1e-3}[m.group(2)]
    return float(m.group(1)) * scale


# ---------------------------------------------------------------------------
# subcommands; each returns (header, rows, summary)

def cmd_lifetime(cfg, threads, args):
    from .experiments.lifetime import lifetime_experiment
    lc = cfg["lifetime"]
    times = np.linspace(0.0, lc["tmax_us"], lc["npoints"])
    res = lifetime_experiment(lc["mode"], times, cfgmod.code_words(cfg), cfgmod.device_params(cfg),
                              cfgmod.drive(cfg), cfg["cavity_dim"], jmax=lc["jmax"], threads=threads,
                              noise_off=tuple(cfg["noise_off"]))
    header = ["time_us", "F_pZ", "F_mZ", "F_pX", "F_mX", "F_pY", "F_mY", "F_process"]
    summary = {k: {"A": a, "tau_us": t} for k, (a, t) in res.fits.items()}
    print(f"tau_process = {res.tau('process'):.6g} us  (pole {res.tau('pole'):.6g} us, "
          f"equator {res.tau('equator'):.6g} us)")
    return header, res.table(), summary


def cmd_trajectory(cfg, threads, args):
    from .codes import CARDINAL_STATES, encode
    from .dissipator import JumpProcess, jump_count_probs, monte_carlo_unravel
    tc = cfg["trajectory"]
    dim = 16
    jp = JumpProcess.prespa(dim, 1.0)
    psi = encode(cfgmod.code_words(cfg), CARDINAL_STATES[tc["state"]], dim)
    probs, deficit = jump_count_probs(psi, tc["kappa_t"], tc["jmax"], jp)
    mc = monte_carlo_unravel(psi, tc["kappa_t"], tc["ntraj"], cfg["seed"], jp, threads=threads)
    hist = mc.jump_histogram(tc["jmax"]) / tc["ntraj"]
    rows = [(j, probs[j], hist[j]) for j in range(tc["jmax"] + 1)]
    return ["jumps", "p_analytic", "p_monte_carlo"], rows, {"deficit": deficit}


def cmd_rates(cfg, threads, args):
    from .circuitmodel import calibrate_comb, mixing_rates, optimal_comb, stark_shift, transmon_rates
    p = cfgmod.device_params(cfg)
    comb, scale = calibrate_comb()
    om = mixing_rates(comb)
    lam = transmon_rates(comb)
    stark = [stark_shift(x, p) for x in comb.xi]
    eta, delta, res = optimal_comb(p, eta_mhz=comb.eta_mhz)
    rows = [(n + 1, om[n].real, om[n].imag, lam[n].real, lam[n].imag, stark[n],
             res.transmon_khz[n], res.mixing_khz[n]) for n in range(4)]
    header = ["path", "omega_re_khz", "omega_im_khz", "lambda_re_khz", "lambda_im_khz",
              "stark_mhz", "eps_transmon_khz", "eps_mixing_khz"]
    summary = {"prefactor_mix_khz": comb.prefactor_mix_khz, "lambda_scale_khz": scale,
               "stark_total_mhz": float(sum(stark)), "eta_mhz": eta, "delta_offset_mhz": delta,
               "max_residual_khz": res.max_abs_khz}
    return header, rows, summary


def _cavity_state(spec, dim):
    """'vacuum', 'fock:N', 'cat:ALPHA' (even cat) or a cardinal key."""
    from .codes import CARDINAL_STATES, CatParams, cat_state, encode, EXPERIMENTAL
    if spec == "vacuum":
        spec = "fock:0"
    if spec.startswith("fock:"):
        psi = np.zeros(dim, dtype=complex)
        psi[int(spec[5:])] = 1.0
        return psi
    if spec.startswith("cat:"):
        return cat_state(CatParams(float(spec[4:]), parity_sign=1), dim)
    if spec in CARDINAL_STATES:
        return encode(EXPERIMENTAL, CARDINAL_STATES[spec], dim)
    raise InvalidInput(f"unknown state {spec!r}")


def cmd_spectroscopy(cfg, threads, args):
    from .experiments.spectroscopy import transmon_spectroscopy
    from .opensystem import MasterEqProblem, ideal_prespa_noise, lindblad_evolve
    sc = cfg["spectroscopy"]
    p = cfgmod.device_params(cfg)
    dim = 16
    psi = _cavity_state(sc["init"], dim)
    # recovery modelled as cavity loss followed by parity conversion at the
    # rate set by the measured conversion half-time
    from .dissipator import prespa_truncated
    from .opensystem import NoiseModel
    rate = np.log(2) / 8.41
    nm = ideal_prespa_noise(dim, p.gamma_cavity) + NoiseModel((("conversion", prespa_truncated(dim), rate),))
    rho = lindblad_evolve(MasterEqProblem(np.zeros((dim, dim)), nm, np.outer(psi, psi.conj()),
                                          [0.0, sc["time_us"]]))[-1]
    d = np.linspace(-8.5 * p.chi_q_mhz, 0.5 * p.chi_q_mhz, sc["npoints"])
    res = transmon_spectroscopy(rho, d, p)
    pops = np.real(np.diag(rho))
    return ["detuning_mhz", "p_excited"], zip(res.detunings, res.prob), {"fock_populations": pops[:10]}


def cmd_spectroscopy2d(cfg, threads, args):
    from .experiments.spectroscopy import spectroscopy_2d
    sc = cfg["spectroscopy2d"]
    g = np.linspace(-sc["span_mhz"], sc["span_mhz"], sc["npoints"])
    dr = cfgmod.drive(cfg)
    path = sc["init_fock"] // 2
    res = spectroscopy_2d(g, g, sc["init_fock"], cfgmod.device_params(cfg), abs(dr.omega_khz[path]),
                          abs(dr.lam_khz[path]), sc["duration_us"])
    rows = [(a, b, res.prob[i, j]) for i, a in enumerate(g) for j, b in enumerate(g)]
    i, j = np.unravel_index(np.argmax(res.prob), res.prob.shape)
    return ["delta_q_mhz", "delta_m_mhz", "likelihood"], rows, {"max_at_mhz": [g[i], g[j]]}


def cmd_ramsey(cfg, threads, args):
    from .experiments.ramsey import kerr_frame_khz, prespa_ramsey
    rc = cfg["ramsey"]
    p = cfgmod.device_params(cfg)
    n, m = rc["levels"]
    psi = np.zeros(max(n, m) + 4, dtype=complex)
    psi[[n, m]] = 1.0
    times = np.linspace(0, rc["tmax_us"], rc["npoints"])
    frame = kerr_frame_khz(n, m, p.kerr_khz) if rc["co_rotate"] else 0.0
    res = prespa_ramsey(psi, rc["alpha"], times, p, frame_khz=frame, fit=not rc["co_rotate"])
    return ["time_us", "wigner"], zip(times, res.w), {"freq_khz": res.freq_khz, "decay_per_us": res.decay_per_us}


def cmd_wigner(cfg, threads, args):
    from .experiments.tomography import wigner
    wc = cfg["wigner"]
    psi = _cavity_state(wc["state"], 12)
    x = np.linspace(-wc["extent"], wc["extent"], wc["npoints"])
    grid = x[None, :] + 1j * x[:, None]
    W = wigner(np.outer(psi, psi.conj()), grid)
    rows = [(grid[i, j].real, grid[i, j].imag, W[i, j]) for i in range(len(x)) for j in range(len(x))]
    return ["re_alpha", "im_alpha", "W"], rows, {"W_origin": float(wigner(np.outer(psi, psi.conj()), np.array([0j]))[0])}


def cmd_chi(cfg, threads, args):
    from .experiments.tomography import chi_matrix, ideal_prespa_channel, noisy_prespa_channel
    cc = cfg["chi"]
    if cc["model"] == "ideal":
        ch = ideal_prespa_channel(8)
    else:
        ch = noisy_prespa_channel(cc["duration_us"], cfgmod.device_params(cfg), cfgmod.drive(cfg),
                                  dim=cfg["cavity_dim"])
    pm = chi_matrix(ch, cc["duration_us"])
    rows = [(n, n, k, k, pm.population[k, n], 0.0) for n in range(8) for k in range(8)]
    rows += [(n, m, n + 1, m + 1, v.real, v.imag) for (n, m), v in pm.coherence.items()]
    return ["n_in", "m_in", "n_out", "m_out", "re", "im"], rows, \
        {"mean_coherence": pm.mean_coherence(), "cross_path_max": pm.cross}


def cmd_steady(cfg, threads, args):
    from .opensystem import device_noise, steady_state
    from .circuitmodel import prespa_hamiltonian
    from .qalg import HilbertSpace
    p = cfgmod.device_params(cfg)
    space = HilbertSpace((cfg["steady"]["cavity_dim"], 2, 2))
    H = prespa_hamiltonian(p, space, cfgmod.drive(cfg))
    rho = steady_state(H, device_noise(p, space))
    pops = np.einsum("ii->i", rho).real.reshape(space.dims).sum(axis=(1, 2))
    odd = float(pops[1::2].sum())
    return ["n", "population"], enumerate(pops), {"odd_parity_weight": odd}


def cmd_heating(cfg, threads, args):
    from .opensystem import heating_rate_estimate, heating_scan
    hc = cfg["heating"]
    p = cfgmod.device_params(cfg)
    om = np.asarray(hc["omega_khz"], dtype=float)
    sim = heating_scan(om, p, hc["driven"]) * 1e3
    est = np.array([heating_rate_estimate(o, p, hc["driven"]) for o in om]) * 1e3
    return ["omega_khz", "gamma01_sim_per_ms", "gamma01_estimate_per_ms"], zip(om, sim, est), {}


def cmd_grape(cfg, threads, args):
    from . import grape
    gc = cfg["grape"]
    dims = tuple(gc["dims"])
    kw = {k: gc[k] for k in ("eta0", "beta", "alpha2", "alpha3", "alpha4", "max_iter",
                             "c1_threshold", "init_scale")}
    code = cfgmod.code_words(cfg)
    p = cfgmod.device_params(cfg)
    if gc["target"] == "prep":
        prob = grape.prep_problem(grape.zero_logical(code, dims[0]), dims, gc["duration_us"], gc["dt_ns"], p, **kw)
    else:
        prob = grape.decode_problem(code, dims, gc["duration_us"], gc["dt_ns"], p, **kw)
    pulse, hist = grape.optimize(prob, seed=cfg["seed"])
    F = grape.fidelity(pulse, prob)
    print(f"fidelity = {F:.6f} after {len(hist.cost)} iterations")
    header = ["step"] + [f"u_{k + 1}" for k in range(prob.n_controls)]
    rows = [(n, *pulse.u[:, n]) for n in range(pulse.n_steps)]
    return header, rows, {"fidelity": F, "iterations": len(hist.cost), "dt_ns": pulse.dt_ns,
                          "dims": list(dims), "controls": list(prob.control_names)}


def cmd_budget(cfg, threads, args):
    from .budget import budget_totals, format_budget, load_budget, row_contributions
    bc = cfg["budget"]
    rows = load_budget(bc["input"])
    p = cfgmod.device_params(cfg)
    print(format_budget(rows, p, bc["derived"]))
    gl, gt = budget_totals(rows, p, bc["derived"])
    out = [(r.name, r.rate, r.unit, *row_contributions(r, p, bc["derived"])) for r in rows]
    out.append(("total", "", "", gl, gt))
    return ["channel", "occurrence", "unit", "longitudinal_per_ms", "transverse_per_ms"], out, \
        {"gamma_long_per_ms": gl, "gamma_trans_per_ms": gt}


def cmd_validate(cfg, threads, args):
    checks = run_invariants()
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    rows = [(name, "1" if ok else "0", detail) for name, ok, detail in checks]
    return ["check", "passed", "detail"], rows, {"all_passed": all(c[1] for c in checks)}


def run_invariants():
    """Quick invariant suite; returns (name, passed, detail) triples."""
    from .budget import budget_totals, load_budget
    from .codes import CARDINAL_STATES, EXPERIMENTAL, OPTIMAL, cavity_moments, encode
    from .dissipator import JumpProcess, averaged_density
    from .experiments.tomography import wigner
    from .opensystem import MasterEqProblem, ideal_prespa_noise, lindblad_evolve
    from .qalg import check_density, trace_distance
    out = []
    m = cavity_moments(EXPERIMENTAL)
    out.append(("code moments", np.allclose(m, (3.6, 3.4, 16.6, 13.0), atol=1e-12), f"{np.round(m, 12)}"))
    out.append(("optimal code", np.allclose(OPTIMAL.as_array(), (0.5, np.sqrt(3) / 2, np.sqrt(3) / 2, 0.5),
                                            atol=1e-15), ""))
    dim = 12
    jp = JumpProcess.prespa(dim, 1.0)
    psi = encode(EXPERIMENTAL, CARDINAL_STATES["pX"], dim)
    rho_a, _ = averaged_density(psi, 0.3, 20, jp)
    rho_l = lindblad_evolve(MasterEqProblem(np.zeros((dim, dim)), ideal_prespa_noise(dim, 1.0),
                                            np.outer(psi, psi.conj()), [0.0, 0.3]))[-1]
    td = trace_distance(rho_a, rho_l)
    out.append(("trajectory mixture vs master equation", td < 1e-6, f"trace distance {td:.2e}"))
    flags = check_density(rho_l)
    out.append(("evolved state is a density matrix", all(flags), f"{flags}"))
    w0 = wigner(np.diag([1.0, 0.0]), np.array([0j]))[0]
    w1 = wigner(np.diag([0.0, 1.0]), np.array([0j]))[0]
    out.append(("Wigner parity at origin", abs(w0 - 2 / np.pi) < 1e-12 and abs(w1 + 2 / np.pi) < 1e-12,
                f"{w0:.12f} {w1:.12f}"))
    gl, gt = budget_totals(load_budget(), derived=False)
    out.append(("budget totals", abs(gl - 2.9) < 0.05 and abs(gt - 3.8) < 0.05, f"{gl:.3f} {gt:.3f}"))
    return out


COMMANDS = {name: globals()[f"cmd_{name}"] for name in FIGURES}


# ---------------------------------------------------------------------------
# entry point

def build_parser():
    parser = argparse.ArgumentParser(prog="prespa-sim", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--defaults", choices=cfgmod.DEFAULT_SETS, default="desk")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--out", help="output directory (default runs/<command>)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in FIGURES:
        sp = sub.add_parser(name, parents=[common], help=FIGURES[name])
        if name == "lifetime":
            sp.add_argument("--mode", choices=["free", "free-fock", "ideal-prespa", "full", "full-idle"])
            sp.add_argument("--code", choices=["experimental", "optimal"])
            sp.add_argument("--tmax", help="e.g. 2000us or 2ms")
            sp.add_argument("--npoints", type=int)
        elif name == "trajectory":
            sp.add_argument("--state")
            sp.add_argument("--kappa-t", type=float)
            sp.add_argument("--ntraj", type=int)
        elif name == "spectroscopy":
            sp.add_argument("--init", help="vacuum, fock:N, cat:ALPHA or a cardinal key")
            sp.add_argument("--time", help="hold time, e.g. 25us")
        elif name == "spectroscopy2d":
            sp.add_argument("--init-fock", type=int)
        elif name == "chi":
            sp.add_argument("--model", choices=["ideal", "noisy"])
            sp.add_argument("--duration", help="e.g. 25us")
        elif name == "grape":
            sp.add_argument("--target", choices=["prep", "decode"])
            sp.add_argument("--iters", type=int)
        elif name == "budget":
            sp.add_argument("--input", help="budget JSON file")
        elif name == "wigner":
            sp.add_argument("--state")
    return parser


def _overrides(args):
    o = {}
    if args.seed is not None:
        o["seed"] = args.seed
    c = args.command
    get = lambda k: getattr(args, k, None)
    sec = {}
    if c == "lifetime":
        if get("code"):
            o["code"] = args.code
        if get("mode"):
            sec["mode"] = args.mode
        if get("tmax"):
            sec["tmax_us"] = parse_time_us(args.tmax)
        if get("npoints"):
            sec["npoints"] = args.npoints
    elif c == "trajectory":
        for k, key in (("state", "state"), ("kappa_t", "kappa_t"), ("ntraj", "ntraj")):
            if get(k) is not None:
                sec[key] = get(k)
    elif c == "spectroscopy":
        if get("init"):
            sec["init"] = args.init
        if get("time"):
            sec["time_us"] = parse_time_us(args.time)
    elif c == "spectroscopy2d" and get("init_fock") is not None:
        sec["init_fock"] = args.init_fock
    elif c == "chi":
        if get("model"):
            sec["model"] = args.model
        if get("duration"):
            sec["duration_us"] = parse_time_us(args.duration)
    elif c == "grape":
        if get("target"):
            sec["target"] = args.target
            if args.target == "decode":
                sec.setdefault("duration_us", 2.0)
        if get("iters") is not None:
            sec["max_iter"] = args.iters
    elif c == "budget" and get("input"):
        sec["input"] = args.input
    elif c == "wigner" and get("state"):
        sec["state"] = args.state
    if sec:
        o[c] = sec
    return o


def resolve_threads(args, cfg):
    if args.threads is not None:
        n = args.threads
    elif os.environ.get("PRESPA_SIM_THREADS"):
        n = int(os.environ["PRESPA_SIM_THREADS"])
    else:
        n = cfg.get("threads", 1)
    if n < 1:
        raise InvalidInput("thread count must be positive")
    return n


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = cfgmod.load_config(args.config, args.defaults, _overrides(args))
        threads = resolve_threads(args, cfg)
    except (InvalidInput, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out) if args.out else Path("runs") / args.command
    try:
        header, rows, summary = COMMANDS[args.command](cfg, threads, args)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PrespaError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "data.csv", header, rows)
    write_meta(out / "meta.json", args.command, cfg, summary)
    if args.command == "validate" and not summary["all_passed"]:
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
