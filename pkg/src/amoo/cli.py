"""Configuration-driven experiment runner.

Verbs: ``run`` (execute a config, persist trace.csv / summary.json /
plot.svg), ``analyze`` (rate fitting and bound checks on a trace),
``plot`` (emit the SVG), ``list-problems``, and ``verify`` (the bundled
numeric verification suites).  Exit codes: 0 success, 2 configuration or
input error, 3 numeric failure (partial trace still persisted), 1 failed
verification.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, driver, problems, traceio, weighting
from .core import NumericError, ObjectiveOracle
from .driver import ConfigurationError
from .hessians import HutchinsonConfig
from .plotting import write_trace_svg

_PRESETS = ("camoo-theory", "pamoo-theory", "practical-sgd", "practical-adam")


def _require_keys(section: dict, allowed: dict, where: str) -> dict:
    """Reject unknown keys and apply per-key parsers; returns parsed values."""
    out = {}
    for key in section:
        if key not in allowed:
            raise ConfigurationError(f"unknown key {key!r} in {where}")
    for key, (parser, default) in allowed.items():
        if key in section:
            try:
                out[key] = parser(section[key])
            except ConfigurationError:
                raise
            except (TypeError, ValueError) as exc:
                raise ConfigurationError(f"bad value for {where}.{key}: {exc}")
        else:
            out[key] = default
    return out


_REQUIRED = object()


def _as_tuple(v):
    return tuple(v)


def _as_nested_tuple(v):
    return tuple(tuple(row) for row in v)


def parse_problem_spec(section: dict, where: str = "problem") -> problems.ProblemSpec:
    if "kind" not in section:
        raise ConfigurationError(f"{where}.kind is required")
    kind = section["kind"]
    common = {"kind": (str, _REQUIRED)}
    by_kind = {
        "specification": {"delta": (float, 0.1)},
        "selection": {"delta": (float, 0.1), "m": (int, 2), "n": (int, 2)},
        "local_curvature": {"n": (int, 1)},
        "quad_family": {
            "h_list": (_as_nested_tuple, ()),
            "alpha_list": (_as_tuple, ()),
        },
        "mlp_matching": {
            "variant": (str, "selection"),
            "input_dim": (int, 20),
            "hidden": (int, 32),
            "output_dim": (int, 7),
            "dataset_size": (int, 50),
            "seed": (int, 0),
            "activation": (str, "relu"),
            "target_offset": (float, 10.0),
        },
        "misaligned": {
            "base": (dict, _REQUIRED),
            "shifts": (_as_nested_tuple, _REQUIRED),
        },
    }
    if kind not in by_kind:
        raise ConfigurationError(
            f"unknown problem kind {kind!r}; see `amoo list-problems`"
        )
    parsed = _require_keys(section, {**common, **by_kind[kind]}, where)
    for key, value in parsed.items():
        if value is _REQUIRED:
            raise ConfigurationError(f"{where}.{key} is required")
    if kind == "misaligned":
        base = parse_problem_spec(parsed.pop("base"), where=f"{where}.base")
        return problems.ProblemSpec(kind=kind, base=base, shifts=parsed["shifts"])
    return problems.ProblemSpec(**parsed)


def _parse_weighting(section: dict) -> driver.WeightingChoice:
    allowed = {
        "kind": (str, "ew"),
        "camoo": (dict, {}),
        "pamoo": (dict, {}),
        "weights": (_as_tuple, ()),
        "hutchinson": (dict, {}),
        "force_hutchinson": (bool, False),
    }
    parsed = _require_keys(section, allowed, "weighting")
    camoo_vals = _require_keys(
        parsed["camoo"],
        {
            "mode": (str, weighting.MODE_EXACT),
            "w_min": (float, 0.0),
            "pu_iterations": (int, 100),
            "pu_tau": (float, 0.01),
            "supergrad_iterations": (int, 500),
            "supergrad_step": (float, 0.1),
            "warm_start": (bool, True),
        },
        "weighting.camoo",
    )
    pamoo_vals = _require_keys(
        parsed["pamoo"],
        {
            "step": (float, 3e-3),
            "iterations": (int, 200),
            "clip_floor": (float, 1e-6),
            "gram_tau": (float, 1e-4),
            "f_star": (lambda v: None if v is None else tuple(v), None),
            "warm_start": (bool, True),
        },
        "weighting.pamoo",
    )
    hutch_vals = _require_keys(
        parsed["hutchinson"],
        {
            "num_samples": (int, 10),
            "fd_step": (float, 1e-4),
            "rng_seed": (int, 0),
            "ema_decay": (lambda v: None if v is None else float(v), None),
        },
        "weighting.hutchinson",
    )
    if pamoo_vals["f_star"] is not None:
        pamoo_vals["f_star"] = np.asarray(pamoo_vals["f_star"], dtype=np.float64)
    return driver.WeightingChoice(
        kind=parsed["kind"],
        camoo=weighting.CamooConfig(**camoo_vals),
        pamoo=weighting.PamooConfig(**pamoo_vals),
        fixed_weights=parsed["weights"],
        hutchinson=HutchinsonConfig(**hutch_vals),
        force_hutchinson=parsed["force_hutchinson"],
    )


def _parse_inner(section: dict):
    allowed = {
        "kind": (str, "gd"),
        "step": (float, _REQUIRED),
        "b1": (float, 0.9),
        "b2": (float, 0.999),
        "eps": (float, 1e-8),
    }
    parsed = _require_keys(section, allowed, "inner")
    if parsed["step"] is _REQUIRED:
        raise ConfigurationError("inner.step is required")
    if parsed["kind"] == "gd":
        return driver.GDConfig(step=parsed["step"])
    if parsed["kind"] == "adam":
        return driver.AdamConfig(
            step=parsed["step"], b1=parsed["b1"], b2=parsed["b2"], eps=parsed["eps"]
        )
    raise ConfigurationError(f"unknown inner.kind {parsed['kind']!r}")


def _apply_preset(name: str, problem: problems.ProblemSpec):
    built = problems.build(problem)
    if name == "camoo-theory":
        wc, inner = driver.theory_camoo(built.meta, built.objectives.m)
        return wc, inner, False
    if name == "pamoo-theory":
        wc, inner = driver.theory_pamoo()
        return wc, inner, False
    if name == "practical-sgd":
        return driver.WeightingChoice(kind="ew"), driver.practical_sgd(), True
    if name == "practical-adam":
        return driver.WeightingChoice(kind="ew"), driver.practical_adam(), True
    raise ConfigurationError(f"unknown preset {name!r}; choose from {_PRESETS}")


def parse_run_config(doc: dict) -> driver.RunConfig:
    if not isinstance(doc, dict):
        raise ConfigurationError("config root must be a JSON object")
    allowed = {"problem", "weighting", "inner", "run", "output", "preset"}
    for key in doc:
        if key not in allowed:
            raise ConfigurationError(f"unknown key {key!r} in config")
    if "problem" not in doc:
        raise ConfigurationError("config section 'problem' is required")
    problem = parse_problem_spec(doc["problem"])

    scale_default = True
    if "preset" in doc:
        if "weighting" in doc or "inner" in doc:
            raise ConfigurationError(
                "preset replaces the weighting and inner sections; remove them"
            )
        weighting_choice, inner, scale_default = _apply_preset(doc["preset"], problem)
    else:
        if "inner" not in doc:
            raise ConfigurationError("config section 'inner' is required")
        weighting_choice = _parse_weighting(doc.get("weighting", {}))
        inner = _parse_inner(doc["inner"])

    run_vals = _require_keys(
        doc.get("run", {}),
        {
            "steps": (int, _REQUIRED),
            "seed": (int, 0),
            "record_every": (int, 1),
            "camoo_lr_scale_by_m": (bool, scale_default),
            "x0": (lambda v: None if v is None else tuple(v), None),
            "f_star_override": (lambda v: None if v is None else tuple(v), None),
        },
        "run",
    )
    if run_vals["steps"] is _REQUIRED:
        raise ConfigurationError("run.steps is required")
    return driver.RunConfig(
        problem=problem,
        weighting=weighting_choice,
        inner=inner,
        steps=run_vals["steps"],
        seed=run_vals["seed"],
        record_every=run_vals["record_every"],
        camoo_lr_scale_by_m=run_vals["camoo_lr_scale_by_m"],
        x0=run_vals["x0"],
        f_star_override=run_vals["f_star_override"],
    )


def parse_output_options(doc: dict) -> dict:
    return _require_keys(
        doc.get("output", {}),
        {"plot": (bool, False), "fit_rate_tail": (float, 0.5)},
        "output",
    )


def _default_out_dir(explicit: str | None) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get("AMOO_OUT_DIR", "."))


def _run_verdicts(trace: driver.RunTrace) -> dict:
    verdicts: dict = {"finite": trace.error is None}
    cfg = trace.config
    built = problems.build(cfg.problem)
    meta = built.meta
    kind = cfg.weighting.kind
    if (
        trace.error is None
        and kind in ("camoo", "pamoo")
        and meta.beta is not None
        and meta.mu_g is not None
        and meta.m_self is not None
        and meta.alignment_eps == 0.0  # the envelope assumes exact alignment
        and trace.records
        and trace.records[0].residual is not None
    ):
        tp = analysis.TheoremParams(
            beta=meta.beta,
            mu=meta.mu_g if kind == "camoo" else (meta.mu_l or meta.mu_g),
            m_self=meta.m_self,
            m=built.objectives.m,
            r0=trace.records[0].residual,
            which=analysis.CAMOO if kind == "camoo" else analysis.PAMOO,
        )
        try:
            verdicts["theorem_bound"] = analysis.theorem_bound_check(trace, tp)
        except ValueError:
            verdicts["theorem_bound"] = None
    else:
        verdicts["theorem_bound"] = None
    return verdicts


def cmd_run(config_path: str, out_dir: str | None, print_fn=print) -> int:
    try:
        with open(config_path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print_fn(f"error: cannot read config {config_path}: {exc}")
        return 2
    try:
        cfg = parse_run_config(doc)
        out_opts = parse_output_options(doc)
    except ConfigurationError as exc:
        print_fn(f"config error: {exc}")
        return 2

    out = _default_out_dir(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    code = 0
    try:
        trace = driver.run(cfg)
    except NumericError as exc:
        trace = exc.payload
        code = 3
        print_fn(f"numeric failure: {exc}")
        if trace is None:
            return code
    except ConfigurationError as exc:
        print_fn(f"config error: {exc}")
        return 2

    traceio.write_trace_csv(trace, out / "trace.csv")
    fitted = None
    if code == 0 and len(trace.residuals()) >= 20:
        try:
            fitted = analysis.fit_rate(trace, out_opts["fit_rate_tail"])
        except ValueError:
            fitted = None
    verdicts = _run_verdicts(trace) if code == 0 else {"finite": False}
    traceio.write_summary_json(
        traceio.summary_dict(trace, fitted_rate=fitted, verdicts=verdicts),
        out / "summary.json",
    )
    if out_opts["plot"] and trace.records:
        write_trace_svg(trace, out / "plot.svg")
    final = trace.final()
    print_fn(
        f"wrote {out / 'trace.csv'} ({len(trace.records)} records, "
        f"final step {final.step})"
    )
    return code


def cmd_analyze(
    trace_path: str,
    fit: bool = False,
    tail_fraction: float = 0.5,
    theorem: dict | None = None,
    print_fn=print,
) -> int:
    try:
        trace = traceio.read_trace_csv(trace_path)
    except (OSError, ValueError) as exc:
        print_fn(f"error: cannot read trace {trace_path}: {exc}")
        return 2
    report = {}
    if fit:
        try:
            report["fitted_rate"] = analysis.fit_rate(trace, tail_fraction)
        except ValueError as exc:
            print_fn(f"error: {exc}")
            return 2
    if theorem is not None:
        try:
            tp = analysis.TheoremParams(
                beta=theorem["beta"],
                mu=theorem["mu"],
                m_self=theorem["m_self"],
                m=trace.m,
                r0=trace.residuals()[0][1],
                which=theorem["which"],
            )
            report["theorem_bound"] = analysis.theorem_bound_check(trace, tp)
        except (ValueError, IndexError) as exc:
            print_fn(f"error: {exc}")
            return 2
    print_fn(json.dumps(report, indent=2))
    return 0


def cmd_plot(trace_path: str, out_path: str, print_fn=print) -> int:
    try:
        trace = traceio.read_trace_csv(trace_path)
    except (OSError, ValueError) as exc:
        print_fn(f"error: cannot read trace {trace_path}: {exc}")
        return 2
    write_trace_svg(trace, out_path)
    print_fn(f"wrote {out_path}")
    return 0


def cmd_list_problems(print_fn=print) -> int:
    listing = {
        "specification": "two 2-D quadratics, weakly curved alone (delta)",
        "selection": "m-1 weak quadratics plus one well-conditioned (delta, m, n)",
        "local_curvature": "exp(x)-x against its mirror image (n)",
        "quad_family": "generalized quadratics (x'Hx)^alpha (h_list, alpha_list)",
        "mlp_matching": "two-layer network matches a fixed teacher "
        "(variant, input_dim, hidden, output_dim, dataset_size, seed)",
        "misaligned": "per-objective shifts of a base problem (base, shifts)",
    }
    for kind, desc in listing.items():
        print_fn(f"{kind:18s} {desc}")
    return 0


# ---------------------------------------------------------------------------
# Verification suites
# ---------------------------------------------------------------------------


def _suite_recurrence() -> tuple[bool, str]:
    failures = 0
    total = 0
    for a1 in (0.1, 0.5, 1.5):
        for a2 in (0.0, 1.0, 10.0):
            for r0 in (0.1, 1.0, 100.0):
                total += 2
                p = analysis.RecurrenceParams(
                    alpha1=a1, alpha2=a2, r0=r0, horizon=1000
                )
                _, _, holds = analysis.recurrence_simulate_and_bound(p, "exact")
                failures += 0 if holds else 1
                a3, a4 = analysis.max_admissible_noise(a1, a2)
                p_eps = analysis.RecurrenceParams(
                    alpha1=a1, alpha2=a2, alpha3=a3, alpha4=a4, r0=r0,
                    horizon=1000,
                )
                _, _, holds = analysis.recurrence_simulate_and_bound(p_eps, "eps")
                failures += 0 if holds else 1
    return failures == 0, f"{total - failures}/{total} grid points hold"


def _suite_weyl(seed: int) -> tuple[bool, str]:
    report = analysis.weyl_degradation_suite(seed=seed, trials=100)
    return (
        report["passes"] == report["trials"],
        f"{report['passes']}/{report['trials']} trials pass",
    )


def _suite_self_concordance() -> tuple[bool, str]:
    exp_oracle = ObjectiveOracle(
        dim=1,
        value=lambda x: float(np.exp(x[0]) - x[0]),
        gradient=lambda x: np.exp(x) - 1.0,
        hessian=lambda x: np.exp(x).reshape(1, 1),
    )
    quad = ObjectiveOracle(
        dim=2,
        value=lambda x: float(x @ x),
        gradient=lambda x: 2.0 * x,
        hessian=lambda x: 2.0 * np.eye(2),
    )
    checks = 0
    fails = 0
    for x in (-1.0, 0.0, 0.5, 1.5):
        for y in (-1.5, -0.3, 0.0, 1.0, 2.0):
            checks += 1
            if not analysis.self_concordance_check(exp_oracle, [x], [y], 1.0):
                fails += 1
    rng = np.random.default_rng(7)
    for _ in range(20):
        x, y = rng.normal(size=2), rng.normal(size=2)
        checks += 1
        if not analysis.self_concordance_check(quad, x, y, 0.0):
            fails += 1
    return fails == 0, f"{checks - fails}/{checks} inequalities hold"


def _suite_bilinear(seed: int) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    fails = 0
    for _ in range(20):
        A = rng.uniform(0.0, 3.0, size=(5, 8))
        sol = weighting.solve_bilinear_pu(
            A,
            weighting.CamooConfig(pu_iterations=60000, pu_tau=0.0),
            gap_target=9e-4,
        )
        if sol.gap > 1e-3:
            fails += 1
    for _ in range(10):
        A = rng.uniform(0.0, 3.0, size=(2, 6))
        sol = weighting.solve_bilinear_pu(
            A,
            weighting.CamooConfig(pu_iterations=40000, pu_tau=0.0),
            gap_target=2.5e-4,
        )
        grid_w = np.linspace(0.0, 1.0, 10001)
        vals = np.minimum.reduce(
            [grid_w * A[0, j] + (1.0 - grid_w) * A[1, j] for j in range(A.shape[1])]
        )
        if abs(float(np.min(A.T @ sol.w)) - float(vals.max())) > 1e-3:
            fails += 1
    return fails == 0, f"{30 - fails}/30 games solved to tolerance"


def cmd_verify(seed: int = 0, print_fn=print) -> int:
    suites = [
        ("recurrence-bounds", lambda: _suite_recurrence()),
        ("diagonal-degradation", lambda: _suite_weyl(seed)),
        ("self-concordance", lambda: _suite_self_concordance()),
        ("bilinear-oracle", lambda: _suite_bilinear(seed)),
    ]
    all_ok = True
    for name, fn in suites:
        ok, detail = fn()
        all_ok &= ok
        print_fn(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amoo",
        description="Adaptive loss weighting for aligned multi-objective descent",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a JSON experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out-dir", default=None, help="default $AMOO_OUT_DIR or .")

    p_an = sub.add_parser("analyze", help="rate fitting and bound checks")
    p_an.add_argument("trace")
    p_an.add_argument("--fit-rate", action="store_true")
    p_an.add_argument("--tail-fraction", type=float, default=0.5)
    p_an.add_argument("--theorem-check", action="store_true")
    p_an.add_argument("--beta", type=float)
    p_an.add_argument("--mu", type=float)
    p_an.add_argument("--m-self", type=float, default=0.0)
    p_an.add_argument("--which", choices=["CAMOO", "PAMOO"], default="CAMOO")

    p_plot = sub.add_parser("plot", help="emit an SVG of a trace")
    p_plot.add_argument("trace")
    p_plot.add_argument("output")

    sub.add_parser("list-problems", help="list buildable problem kinds")

    p_ver = sub.add_parser("verify", help="run the numeric verification suites")
    p_ver.add_argument("--seed", type=int, default=0)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.out_dir)
    if args.command == "analyze":
        theorem = None
        if args.theorem_check:
            if args.beta is None or args.mu is None:
                print("error: --theorem-check needs --beta and --mu")
                return 2
            theorem = {
                "beta": args.beta,
                "mu": args.mu,
                "m_self": args.m_self,
                "which": args.which,
            }
        return cmd_analyze(
            args.trace,
            fit=args.fit_rate,
            tail_fraction=args.tail_fraction,
            theorem=theorem,
        )
    if args.command == "plot":
        return cmd_plot(args.trace, args.output)
    if args.command == "list-problems":
        return cmd_list_problems()
    if args.command == "verify":
        return cmd_verify(args.seed)
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
