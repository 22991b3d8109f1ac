"""``lgtq <command> --config <path|preset> [--out <dir>] [overrides]``.

Exit codes: 0 success, 1 a property check failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import PRESETS, ConfigError, RunConfig, leaf_keys, parse_value, resolve_raw
from .group_core import GroupError, validate_tables

EXIT_OK, EXIT_CHECK, EXIT_CONFIG = 0, 1, 2
COMMANDS = ("group-check", "trotter-scan", "quench", "gate-fidelity", "error-scan", "cost-report")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


class Run:
    """Output directory bookkeeping; nothing touches disk until :meth:`write`."""

    def __init__(self, command: str, out: Path, config: dict):
        self.command = command
        self.out = out
        self.config = config
        self.files: dict[str, str | bytes] = {}
        self.figures: list = []
        self.results: dict = {}
        self.checks: dict[str, bool] = {}

    def add(self, name: str, content: str) -> None:
        self.files[name] = content

    def figure(self, name: str, fn, *args) -> None:
        self.figures.append((name, fn, args))

    def write(self) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        for name, content in self.files.items():
            (self.out / name).write_text(content)
        for name, fn, args in self.figures:
            fn(*args, self.out / name)
        manifest = {
            "command": self.command,
            "version": __version__,
            "config": self.config,
            "outputs": sorted(list(self.files) + [n for n, _, _ in self.figures] + ["manifest.json"]),
            "results": _jsonable(self.results),
            "checks": {k: bool(v) for k, v in self.checks.items()},
            "passed": all(self.checks.values()),
        }
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return self.out


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_group_check(raw: dict, base_dir: Path, run: Run) -> None:
    from .experiments import group_check
    from .group_core import load_group, make_q8

    if raw["group"] == "q8":
        group = make_q8()
    else:
        path = Path(raw["group"])
        path = path if path.is_absolute() else base_dir / path
        if not path.is_file():
            raise ConfigError(f"group file {path} does not exist")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"group file {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict) or {"cayley", "char_fund", "labels"} - set(data):
            raise ConfigError(f"group file {path} needs keys labels, cayley, char_fund")
        rep = validate_tables(data["cayley"], data["char_fund"])
        if not rep.ok:
            run.results = {"summary": rep.summary(), "associativity_failures": rep.associativity_failures[:20],
                           "inverse_failures": rep.inverse_failures,
                           "class_function_failures": rep.class_function_failures[:20], "errors": rep.errors}
            run.checks["axioms"] = False
            run.add("group_report.json", json.dumps(_jsonable(run.results), indent=2) + "\n")
            return
        try:
            group = load_group(path)
        except GroupError as exc:
            raise ConfigError(str(exc)) from exc
    rep = group_check(group)
    run.results = {k: v for k, v in rep.items() if k != "checks"}
    run.checks.update(rep["checks"])
    run.add("group_report.json", json.dumps(_jsonable(rep), indent=2) + "\n")


def _bank(cfg: RunConfig, run: Run):
    from .experiments import obtain_theta_bank

    bank = obtain_theta_bank(cfg)
    if bank is not None:
        run.add("gate_bank.json", bank.to_json())
        run.results["bank_digest"] = bank.digest
    return bank


def cmd_trotter_scan(cfg: RunConfig, run: Run) -> None:
    from .experiments import trotter_scan
    from .plotting import plot_trotter_scan

    bank = _bank(cfg, run)
    scan = trotter_scan(cfg, bank)
    run.add("trotter_scan.csv", _csv(["dt_lambda_B", "dt", "infidelity"], scan.rows()))
    run.figure("trotter_scan.png", plot_trotter_scan, scan)
    run.results.update(scan.fit)
    run.checks.update(scan.checks)


def cmd_quench(cfg: RunConfig, run: Run) -> None:
    from .experiments import quench
    from .plotting import plot_quench

    bank = _bank(cfg, run)
    res = quench(cfg, bank)
    tr = res.trajectory
    run.add("trajectory.csv", tr.to_csv())
    run.add("exact_energies.csv", _csv(["step", "t", "E_energy", "B_energy"],
                                       ((k, tr.t[k], tr.exact_E[k], tr.exact_B[k]) for k in range(len(tr.t)))))
    run.figure("quench.png", plot_quench, tr)
    run.results.update(res.loss_fit)
    run.checks.update(res.checks)


def cmd_gate_fidelity(cfg: RunConfig, run: Run) -> None:
    from .experiments import gate_fidelity
    from .plotting import plot_gate_fidelity
    from .pulse_hardware.bank import build_qubit_bank, build_theta_bank

    bank = _bank(cfg, run) if cfg.gate_source != "ideal" else None
    bank = bank or build_theta_bank(cfg.hardware, cfg.group)
    qbank = build_qubit_bank(cfg.hardware)
    run.add("gate_bank_qubit.json", qbank.to_json())
    res = gate_fidelity(cfg, bank, qbank)
    rows = [("qudit", res.qudit["fidelity"], res.qudit["norm"], 0),
            ("qubit", res.qubit["fidelity"], res.qubit["norm"], res.qubit["n_entangling"])]
    run.add("gate_fidelity.csv", _csv(["protocol", "fidelity", "norm", "n_entangling"], rows))
    run.figure("gate_fidelity.png", plot_gate_fidelity, res.qudit["fidelity"], res.qubit["fidelity"])
    run.results.update({"qudit": res.qudit, "qubit": res.qubit})
    run.checks.update(res.checks)


def cmd_error_scan(cfg: RunConfig, run: Run) -> None:
    from .experiments import error_scan
    from .plotting import plot_error_scan

    surface, checks = error_scan(cfg)
    run.add("error_scan.csv", _csv(["omega_T", "gamma_ratio", "infidelity"], surface.rows()))
    run.add("error_scan_fits.csv", _csv(["gamma_ratio", "amplitude", "power", "floor", "residual"],
                                        ((f["gamma_ratio"], f["amplitude"], f["power"], f["floor"], f["residual"])
                                         for f in surface.fits)))
    run.figure("error_scan.png", plot_error_scan, surface)
    run.results["fits"] = surface.fits
    run.checks.update(checks)


def cmd_cost_report(cfg: RunConfig, run: Run) -> None:
    from .experiments import cost_report
    from .plotting import plot_cost
    from .qubit_baseline import LEVEL_CIY, LEVEL_CU, count_report

    rep = cost_report(cfg)
    checks = rep.pop("checks")
    counts = [count_report("theta_gate", LEVEL_CU), count_report("theta_gate", LEVEL_CIY),
              count_report("plaquette_trotter_step", LEVEL_CU), count_report("plaquette_trotter_step", LEVEL_CIY)]
    run.add("cost_report.json", json.dumps(_jsonable(rep), indent=2, sort_keys=True) + "\n")
    run.add("counts.json", json.dumps(counts, indent=2) + "\n")
    run.add("cost_report.csv", _csv(["quantity", "value"], ((k, v) for k, v in sorted(rep.items())
                                                             if not isinstance(v, dict))))
    run.figure("cost_report.png", plot_cost, rep)
    run.results.update(rep)
    run.results["counts"] = counts
    run.checks.update(checks)


HANDLERS = {
    "trotter-scan": cmd_trotter_scan,
    "quench": cmd_quench,
    "gate-fidelity": cmd_gate_fidelity,
    "error-scan": cmd_error_scan,
    "cost-report": cmd_cost_report,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lgtq", description="Finite-group lattice gauge theory on Rydberg qudits.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", default=None,
                   help=f"JSON config file or preset name ({', '.join(sorted(PRESETS))})")
    p.add_argument("--out", default=None, help="output directory (default: lgtq_runs/<command>)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any dotted config key; repeatable")
    over = p.add_argument_group("overrides (flag names mirror config keys)")
    for key in leaf_keys():
        over.add_argument(f"--{key}", dest=f"override:{key}", default=None, metavar="VALUE")
    p.add_argument("--version", action="version", version=f"lgtq {__version__}")
    return p


def _overrides(args: argparse.Namespace) -> dict:
    out = {}
    for key in leaf_keys():
        val = getattr(args, f"override:{key}")
        if val is not None:
            out[key] = parse_value(val)
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        out[key.strip()] = parse_value(val)
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if not exc.code else EXIT_CONFIG
    out = Path(args.out) if args.out else Path("lgtq_runs") / args.command
    try:
        overrides = _overrides(args)
        raw, base_dir = resolve_raw(args.config, overrides)
        if args.command == "group-check":
            run = Run(args.command, out, raw)
            cmd_group_check(raw, base_dir, run)
        else:
            from .config import build_config
            from .pulse_hardware.bank import StaleBankError

            cfg = build_config(raw, base_dir)
            run = Run(args.command, out, cfg.to_dict())
            try:
                HANDLERS[args.command](cfg, run)
            except StaleBankError as exc:
                raise ConfigError(str(exc)) from exc
    except ConfigError as exc:
        print(f"lgtq: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    run.write()
    for name, ok in run.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"outputs written to {out}")
    if not all(run.checks.values()) and raw.get("assert_checks", True):
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
