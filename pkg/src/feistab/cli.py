"""Command-line frontend: config parsing, dispatch, report emission.

Subcommands
    witness         locate a non-additivity witness point
    residual        measure the equation residual supremum of a function
    certify         full pointwise stability certificate
    certify-system  level-by-level system certificate
    fit             constructive fit vs. the minimax oracle
    suite           run a batch case list (default: the full matrix)

Exit codes: 0 all verdicts pass, 1 a bound violation, 2 no usable witness,
3 configuration or I/O error. The last stdout line is always machine
parsable: ``VERDICT pass|fail reason=<code>``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time

from .domain import KVec, cube_grid, dk_grid
from .errors import ConfigError, DegenerateWitness, FeistabError, NoWitness
from .feim import Exact, certify, sup_residual
from .harness import NoiseSpec, default_config, minimax_fit, perturb, run_suite
from .measures import ExactJ, JFamily, PerturbedLevels, certify_system
from .multiplicative import Atom, MultiplicativeSpec, additivity_defect, find_witness

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_NO_WITNESS = 2
EXIT_CONFIG = 3

_REPORT_KEYS = (
    "command",
    "config",
    "qstar",
    "defect",
    "eps_measured",
    "a",
    "b",
    "c",
    "d",
    "sup_deviation",
    "max_violation",
    "points_checked",
    "eps_seq",
    "verdict",
    "runtime_ms",
)


def _report(command: str, config: dict, **fields) -> dict:
    rep = {key: None for key in _REPORT_KEYS}
    rep["command"] = command
    rep["config"] = config
    for key, val in fields.items():
        rep[key] = val
    return rep


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".feistab-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _flatten(value):
    if isinstance(value, (dict, list, tuple)):
        return json.dumps(value, sort_keys=True)
    return value


def _csv_rows(report: dict) -> list[dict]:
    """One row per checked level (system) or case (suite), else one row."""
    if report["command"] == "suite":
        rows = []
        for case in report.get("cases", []):
            row = {"command": "suite"}
            row.update(case)
            rows.append(row)
        return rows
    detail = report.get("detail") or {}
    levels = detail.get("levels")
    if levels:
        rows = []
        for level, violation in levels.items():
            row = dict(report)
            row.pop("detail", None)
            row["level"] = level
            row["max_violation"] = violation
            rows.append(row)
        return rows
    row = dict(report)
    row.pop("detail", None)
    return [row]


def _serialize(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    rows = _csv_rows(report)
    fieldnames: list[str] = []
    for row in rows:
        for key in row:
            if key not in fieldnames:
                fieldnames.append(key)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames)
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _flatten(val) for key, val in row.items()})
    return buf.getvalue()


def _emit(report: dict, out: str | None, fmt: str) -> None:
    text = _serialize(report, fmt)
    if out:
        try:
            _atomic_write(out, text)
        except OSError as exc:
            raise ConfigError(f"cannot write report to {out!r}: {exc}") from exc


def _parse_pair(text: str, flag: str) -> tuple[float, float]:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise ConfigError(f"{flag} expects two comma-separated numbers, got {text!r}")
    if len(parts) != 2:
        raise ConfigError(f"{flag} expects two comma-separated numbers, got {text!r}")
    return parts[0], parts[1]


def _load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError("config file must hold a JSON object")
    return obj


def _build_spec(args, cfg: dict) -> MultiplicativeSpec:
    if "M" in cfg:
        spec = MultiplicativeSpec.from_json(cfg["M"])
        k = cfg.get("k")
        if k is not None and int(k) != spec.k:
            raise ConfigError(f"config k={k} disagrees with {spec.k} atoms")
        return spec
    alpha = args.alpha if args.alpha is not None else cfg.get("alpha")
    if alpha is None:
        raise ConfigError("no multiplicative spec: pass --alpha or a config with M")
    k = int(args.k if args.k is not None else cfg.get("k", 1))
    if k < 1:
        raise ConfigError("k must be at least 1")
    return MultiplicativeSpec(tuple(Atom("power", float(alpha)) for _ in range(k)))


def _resolve(args, cfg: dict, name: str, default):
    val = getattr(args, name.replace("-", "_"), None)
    if val is not None:
        return val
    return cfg.get(name, default)


def _resolve_qstar(args, cfg: dict, k: int):
    raw = _resolve(args, cfg, "qstar", "auto")
    if raw == "auto" or raw is None:
        return "auto"
    if isinstance(raw, str):
        try:
            coords = [float(p) for p in raw.split(",")]
        except ValueError:
            raise ConfigError(f"bad --qstar value {raw!r}")
    else:
        coords = [float(p) for p in raw]
    if len(coords) != k:
        raise ConfigError(f"qstar needs {k} coordinates, got {len(coords)}")
    return KVec(coords)


def _noise_from(args, cfg: dict) -> NoiseSpec | None:
    amp = _resolve(args, cfg, "noise", 0.0)
    if not amp:
        return None
    amp = float(amp)
    if amp < 0:
        raise ConfigError("noise amplitude must be nonnegative")
    return NoiseSpec(
        amplitude=amp,
        seed=int(_resolve(args, cfg, "seed", 0)),
        kind=str(_resolve(args, cfg, "noise-kind", "uniform")),
    )


def _grid_resolution(args, cfg: dict, default: int) -> int:
    m = int(_resolve(args, cfg, "grid", default))
    if m < 2:
        raise ConfigError("grid resolution must be at least 2")
    return m


def _print_verdict(verdict: str, reason: str) -> None:
    print(f"VERDICT {verdict} reason={reason}")


# ---------------------------------------------------------------------------
# subcommand bodies; each returns (report, exit_code, reason)


def _cmd_witness(args, cfg):
    M = _build_spec(args, cfg)
    m = _grid_resolution(args, cfg, 100)
    start = time.perf_counter()
    q = find_witness(M, m, float(_resolve(args, cfg, "tau", 1e-6)))
    defect = additivity_defect(M, q)
    report = _report(
        "witness",
        {"M": M.to_json(), "k": M.k, "grid": m},
        qstar=list(q),
        defect=defect,
        verdict="pass",
        runtime_ms=round(1000 * (time.perf_counter() - start), 3),
    )
    print(f"qstar {list(q)} defect {defect:.6g}")
    return report, EXIT_PASS, "ok"


def _base_function(args, cfg, M):
    a, b = _parse_pair(str(_resolve(args, cfg, "exact", "1,0")), "--exact")
    f = Exact(a, b, M)
    noise = _noise_from(args, cfg)
    if noise is not None:
        f = perturb(f, noise)
    return f, a, b, noise


def _cmd_residual(args, cfg):
    M = _build_spec(args, cfg)
    m = _grid_resolution(args, cfg, 16)
    f, _, _, noise = _base_function(args, cfg, M)
    start = time.perf_counter()
    scan = sup_residual(f, M, dk_grid(M.k, m))
    config = {"M": M.to_json(), "k": M.k, "grid": m}
    if noise is not None:
        config["noise"] = {"amplitude": noise.amplitude, "kind": noise.kind, "seed": noise.seed}
    report = _report(
        "residual",
        config,
        eps_measured=scan.sup,
        verdict="pass",
        runtime_ms=round(1000 * (time.perf_counter() - start), 3),
    )
    print(f"eps_measured {scan.sup:.6g}")
    return report, EXIT_PASS, "ok"


def _certify_config(M, m, noise, extra=None):
    config = {"M": M.to_json(), "k": M.k, "grid": m}
    if noise is not None:
        config["noise"] = {"amplitude": noise.amplitude, "kind": noise.kind, "seed": noise.seed}
    if extra:
        config.update(extra)
    return config


def _cmd_certify(args, cfg):
    M = _build_spec(args, cfg)
    m = _grid_resolution(args, cfg, 16)
    f, a0, b0, noise = _base_function(args, cfg, M)
    qstar = _resolve_qstar(args, cfg, M.k)
    start = time.perf_counter()
    cert = certify(f, M, dk_grid(M.k, m), cube_grid(M.k, m), qstar=qstar)
    report = _report(
        "certify",
        _certify_config(M, m, noise, {"exact": [a0, b0]}),
        qstar=list(cert.qstar),
        defect=cert.defect,
        eps_measured=cert.eps_measured,
        a=cert.a,
        b=cert.b,
        sup_deviation=cert.sup_deviation,
        max_violation=cert.max_violation,
        points_checked=cert.points_checked,
        verdict=cert.verdict,
        runtime_ms=round(1000 * (time.perf_counter() - start), 3),
    )
    print(
        f"eps_measured {cert.eps_measured:.6g} sup_deviation {cert.sup_deviation:.6g} "
        f"max_violation {cert.max_violation:.6g}"
    )
    code = EXIT_PASS if cert.passed else EXIT_VIOLATION
    return report, code, "ok" if cert.passed else "bound-violation"


def _cmd_certify_system(args, cfg):
    M = _build_spec(args, cfg)
    m = _grid_resolution(args, cfg, 8)
    levels = int(_resolve(args, cfg, "levels", 5))
    c0, d0 = _parse_pair(str(_resolve(args, cfg, "cd", "1,0")), "--cd")
    amp = float(_resolve(args, cfg, "noise", 0.0))
    seed = int(_resolve(args, cfg, "seed", 0))
    qstar = _resolve_qstar(args, cfg, M.k)
    family = ExactJ(JFamily(c0, d0, M))
    if amp:
        family = PerturbedLevels(
            family,
            {n: NoiseSpec(amplitude=amp, seed=seed + n, kind="uniform") for n in range(2, levels + 1)},
        )
    start = time.perf_counter()
    cert = certify_system(family, M, levels, m, qstar=qstar)
    report = _report(
        "certify-system",
        _certify_config(M, m, None, {"cd": [c0, d0], "levels": levels, "noise_amplitude": amp, "seed": seed}),
        qstar=list(cert.qstar),
        defect=cert.defect,
        c=cert.c,
        d=cert.d,
        eps_seq=list(cert.eps_seq),
        max_violation=cert.worst_violation,
        points_checked=sum(cert.points_checked.values()),
        verdict=cert.verdict,
        runtime_ms=round(1000 * (time.perf_counter() - start), 3),
    )
    report["detail"] = {"levels": {str(n): v for n, v in cert.max_violation.items()}}
    print(f"eps_seq {[f'{e:.3g}' for e in cert.eps_seq]} max_violation {cert.worst_violation:.6g}")
    code = EXIT_PASS if cert.passed else EXIT_VIOLATION
    return report, code, "ok" if cert.passed else "bound-violation"


def _cmd_fit(args, cfg):
    M = _build_spec(args, cfg)
    m = _grid_resolution(args, cfg, 16)
    f, a0, b0, noise = _base_function(args, cfg, M)
    qstar = _resolve_qstar(args, cfg, M.k)
    start = time.perf_counter()
    cert = certify(f, M, dk_grid(M.k, m), cube_grid(M.k, m), qstar=qstar)
    a_fit, b_fit, dev = minimax_fit(f, M, cube_grid(M.k, m), qstar=cert.qstar)
    dominated = dev <= cert.sup_deviation + 1e-9
    report = _report(
        "fit",
        _certify_config(M, m, noise, {"exact": [a0, b0]}),
        qstar=list(cert.qstar),
        defect=cert.defect,
        eps_measured=cert.eps_measured,
        a=cert.a,
        b=cert.b,
        sup_deviation=cert.sup_deviation,
        max_violation=dev - cert.sup_deviation,
        points_checked=cert.points_checked,
        verdict="pass" if dominated else "fail",
        runtime_ms=round(1000 * (time.perf_counter() - start), 3),
    )
    report["detail"] = {"minimax": {"a": a_fit, "b": b_fit, "deviation": dev}}
    print(
        f"constructive ({cert.a:.6g}, {cert.b:.6g}) dev {cert.sup_deviation:.6g}; "
        f"minimax ({a_fit:.6g}, {b_fit:.6g}) dev {dev:.6g}"
    )
    code = EXIT_PASS if dominated else EXIT_VIOLATION
    return report, code, "ok" if dominated else "bound-violation"


def _cmd_suite(args, cfg):
    if cfg:
        config = cfg
    else:
        config = default_config(
            seed=int(args.seed if args.seed is not None else 20260810),
            random_cases=int(args.random_cases),
        )
    report = run_suite(config)
    counts = report["counts"]
    print(f"cases {counts['total']} ok {counts['ok']} failed {counts['failed']}")
    code = EXIT_PASS if report["verdict"] == "pass" else EXIT_VIOLATION
    return report, code, "ok" if code == EXIT_PASS else "case-failure"


_COMMANDS = {
    "witness": _cmd_witness,
    "residual": _cmd_residual,
    "certify": _cmd_certify,
    "certify-system": _cmd_certify_system,
    "fit": _cmd_fit,
    "suite": _cmd_suite,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="feistab",
        description="Numerical stability lab for the multiplicative-type information equation",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file (full atom lists etc.)")
        p.add_argument("--alpha", type=float, help="one power atom per coordinate")
        p.add_argument("--k", type=int, help="dimension (with --alpha)")
        p.add_argument("--grid", type=int, help="lattice resolution m")
        p.add_argument("--tau", type=float, help="witness defect threshold")
        p.add_argument("--out", help="report path")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, help="noise / case seed")
        if name in ("residual", "certify", "fit"):
            p.add_argument("--exact", help="a,b of the base family member")
            p.add_argument("--noise", type=float, help="perturbation amplitude")
            p.add_argument("--noise-kind", choices=("uniform", "checkerboard"))
        if name in ("certify", "certify-system", "fit"):
            p.add_argument("--qstar", help="witness coordinates c1,c2,... or 'auto'")
        if name == "certify-system":
            p.add_argument("--cd", help="c,d of the base closed-form family")
            p.add_argument("--levels", type=int, help="largest level N")
            p.add_argument("--noise", type=float, help="per-level noise amplitude")
        if name == "suite":
            p.add_argument("--random-cases", type=int, default=100)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    cfg = {}
    try:
        if getattr(args, "config", None):
            cfg = _load_config_file(args.config)
        report, code, reason = _COMMANDS[args.command](args, cfg)
        _emit(report, args.out, args.format)
        _print_verdict(report.get("verdict") or "pass", reason)
        return code
    except (NoWitness, DegenerateWitness) as exc:
        report = _report(args.command, cfg or {}, verdict="fail")
        try:
            _emit(report, args.out, args.format)
        except ConfigError:
            pass
        print(f"no usable witness: {exc}")
        _print_verdict("fail", "no-witness")
        return EXIT_NO_WITNESS
    except ConfigError as exc:
        print(f"config error: {exc}")
        _print_verdict("fail", "config-error")
        return EXIT_CONFIG
    except FeistabError as exc:
        print(f"error: {exc}")
        _print_verdict("fail", "config-error")
        return EXIT_CONFIG


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
