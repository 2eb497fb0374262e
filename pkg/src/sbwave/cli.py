"""Command-line front end.

    sbwave COMMAND [--flag value ...] [--config FILE]

Flags override values from the config file, which override defaults.  The
config file holds one ``key = value`` pair per line; ``#`` starts a comment
and keys may use either dashes or underscores.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from dataclasses import dataclass, fields

from . import functionals, orbit, spectral
from .errors import BlowupDetected, DomainError, UsageError
from .evolve import IntegratorConfig, conservation_drift, init_state, run, write_manifest, write_snapshot
from .grid import Grid, make_grid
from .io import fmt, write_json
from .params import PhysParams, WaveParams, check_stability_criterion, compatible_gamma, derive_scales, sigma_eta
from .waveforms import export_profile, sample_profile, stationary_residual

COMMANDS = ("wave", "residual", "spectrum", "hessian", "region", "evolve", "orbit")
PERTURBATIONS = ("amplitude", "bump", "noise")


@dataclass(frozen=True)
class RunConfig:
    command: str
    alpha: float = 1.0
    beta: float = 3.0
    gamma: float = 0.0
    omega: float = -0.05
    v: float = 0.0
    derive_gamma: bool = False
    grid_points: int | None = None
    half_width: float | None = None
    dt: float = 1e-3
    t_end: float = 20.0
    record_every: int = 100
    scheme: str = "strang"
    seed: int = 0
    out: str | None = None
    omega_min: float | None = None
    omega_max: float | None = None
    v_min: float | None = None
    v_max: float | None = None
    steps: int = 101
    v_steps: int = 41
    perturbation: str = "amplitude"
    size: float = 0.01

    def effective_gamma(self) -> float:
        if not self.derive_gamma:
            return self.gamma
        _, eta = sigma_eta(self.alpha, self.omega, self.v)
        return compatible_gamma(self.alpha, self.beta, eta)

    def echo(self) -> dict:
        """Every effective parameter value, suitable for a manifest."""
        d = dataclasses.asdict(self)
        try:
            d["gamma"] = self.effective_gamma()
        except DomainError:
            pass
        return d


_FIELDS = {f.name: f for f in fields(RunConfig) if f.name != "command"}


def _convert(name, raw):
    f = _FIELDS[name]
    t = f.type
    if name == "derive_gamma":
        if isinstance(raw, bool):
            return raw
        s = str(raw).strip().lower()
        if s in ("1", "true", "yes", "on"):
            return True
        if s in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"invalid boolean for {name}", raw)
    try:
        if "int" in t:
            value = int(raw, 0) if isinstance(raw, str) else int(raw)
        elif "float" in t:
            value = float(raw)
            if math.isnan(value):
                raise ValueError
        else:
            value = str(raw)
    except (TypeError, ValueError):
        raise UsageError(f"invalid value for --{name.replace('_', '-')}", raw) from None
    if name == "seed" and not -(2**63) <= value < 2**64:
        raise UsageError("seed must fit in 64 bits", raw)
    if name == "scheme" and value not in ("strang", "rk4"):
        raise UsageError("scheme must be strang or rk4", raw)
    if name == "perturbation" and value not in PERTURBATIONS:
        raise UsageError("unknown perturbation kind", raw)
    return value


def read_config_file(path) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file ({exc.strerror})", str(path)) from None
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError("expected key = value", line)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "command":
            values[key] = value
            continue
        if key not in _FIELDS:
            raise UsageError("unknown config key", key)
        values[key] = value
    return values


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        token = None
        for part in message.split():
            if part.startswith("-"):
                token = part.strip("',:")
                break
        raise UsageError(message, token)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sbwave", add_help=True, argument_default=argparse.SUPPRESS,
                description="Solitary waves of the coupled Schroedinger-Boussinesq system.")
    p.add_argument("command", nargs="?", help="one of: " + ", ".join(COMMANDS))
    p.add_argument("--config", help="key = value config file")
    for name in _FIELDS:
        flag = "--" + name.replace("_", "-")
        if name == "derive_gamma":
            p.add_argument(flag, action="store_const", const=True)
        else:
            p.add_argument(flag, metavar=name.upper())
    return p


def parse_config(argv, config_file=None) -> RunConfig:
    """Build a :class:`RunConfig` from arguments and an optional config file.

    Raises
    ------
    UsageError
        For a missing or unknown command, unknown keys or malformed values.
    """
    ns = vars(_build_parser().parse_args(list(argv)))
    file_path = ns.pop("config", None) or config_file
    values = read_config_file(file_path) if file_path else {}
    command = ns.pop("command", None) or values.pop("command", None)
    values.pop("command", None)
    values.update(ns)
    if command is None:
        raise UsageError("missing command; expected one of " + ", ".join(COMMANDS))
    if command not in COMMANDS:
        raise UsageError("unknown command", command)
    kwargs = {k: _convert(k, v) for k, v in values.items()}
    return RunConfig(command=command, **kwargs)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _phys_wave(cfg: RunConfig):
    wave = WaveParams(cfg.omega, cfg.v)
    try:
        phys = PhysParams(cfg.alpha, cfg.beta, cfg.effective_gamma())
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise UsageError(str(exc)) from None
    return phys, wave


def _grid(cfg: RunConfig, sigma: float) -> Grid:
    if cfg.half_width is None:
        return make_grid(sigma, n_points=cfg.grid_points)
    n = cfg.grid_points or make_grid(sigma).n_points
    try:
        return Grid(cfg.half_width, n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _profile(cfg: RunConfig):
    phys, wave = _phys_wave(cfg)
    scales = derive_scales(phys, wave)
    return sample_profile(phys, wave, scales, _grid(cfg, scales.sigma))


def _manifest(cfg: RunConfig, **extra):
    data = {"config": cfg.echo()}
    data.update(extra)
    return data


def _write_manifest_for(path, cfg, **extra):
    write_json(_manifest(cfg, **extra), str(path) + ".manifest.json")


def _line(out, key, value):
    if isinstance(value, float):
        value = fmt(value)
    print(f"{key} = {value}", file=out)


def cmd_wave(cfg, out):
    prof = _profile(cfg)
    s = prof.scales
    gstar = compatible_gamma(cfg.alpha, cfg.beta, s.eta)
    for key, val in (("sigma", s.sigma), ("eta", s.eta), ("q", s.q), ("gamma", prof.phys.gamma),
                     ("gamma_star", gstar), ("half_width", prof.grid.half_width)):
        _line(out, key, val)
    _line(out, "n_points", prof.grid.n_points)
    if cfg.out:
        export_profile(prof, cfg.out)
        _write_manifest_for(cfg.out, cfg, grid={"half_width": prof.grid.half_width, "n_points": prof.grid.n_points})
    return 0


def cmd_residual(cfg, out):
    prof = _profile(cfg)
    rep = stationary_residual(prof)
    for key in ("r_nls", "r_bsq", "r_grad", "gamma_star"):
        _line(out, key, float(getattr(rep, key)))
    _line(out, "gamma", prof.phys.gamma)
    if abs(prof.phys.gamma - rep.gamma_star) > 1e-12 * max(1.0, abs(rep.gamma_star)):
        print(f"note: gamma = {fmt(prof.phys.gamma)} differs from the compatible value "
              f"gamma* = {fmt(rep.gamma_star)}; the sampled profile is not an exact solution", file=out)
    if cfg.out:
        write_json(_manifest(cfg, residual=dataclasses.asdict(rep)), cfg.out)
    return 0


def cmd_spectrum(cfg, out):
    prof = _profile(cfg)
    reports = spectral.spectral_reports(prof)
    for rep in reports:
        vals = " ".join(fmt(x) for x in rep.eigenvalues)
        print(f"{rep.kind.value}: negative_count = {rep.negative_count} kernel_residual = "
              f"{fmt(rep.kernel_residual)} edge = {fmt(rep.essential_edge)} lowest = {vals}", file=out)
    if cfg.out:
        spectral.write_reports_jsonl(reports, cfg.out)
        _write_manifest_for(cfg.out, cfg)
    return 0


def cmd_hessian(cfg, out):
    phys, wave = _phys_wave(cfg)
    derive_scales(phys, wave)
    rep = functionals.d_hessian(phys, wave)
    region = check_stability_criterion(phys, wave)
    for key in ("d_omega", "d_v", "d_oo", "d_ov", "d_vo", "d_vv", "det"):
        _line(out, key, float(getattr(rep, key)))
    _line(out, "p", rep.p_dpp)
    # both the Hessian count and the parameter-region criterion must agree
    certified = rep.p_dpp == 1 and not rep.degenerate and region.stable_certified
    verdict = "certified stable" if certified else "not certified"
    _line(out, "region_criterion", "certified stable" if region.stable_certified else "not certified")
    print(f"verdict: {verdict}", file=out)
    if cfg.out:
        rec = {k: getattr(rep, k) for k in ("d_omega", "d_v", "d_oo", "d_ov", "d_vo", "d_vv", "det", "p_dpp",
                                            "degenerate")}
        rec["verdict"] = verdict
        rec["region_criterion"] = dataclasses.asdict(region)
        write_json(_manifest(cfg, hessian=rec), cfg.out)
    return 0


def cmd_region(cfg, out):
    phys = PhysParams(cfg.alpha, cfg.beta, cfg.gamma)
    if cfg.omega_min is None or cfg.omega_max is None:
        raise UsageError("region needs --omega-min and --omega-max")
    om = (cfg.omega_min, cfg.omega_max)
    if cfg.v_min is not None or cfg.v_max is not None:
        if cfg.v_min is None or cfg.v_max is None:
            raise UsageError("give both --v-min and --v-max")
        vr = (cfg.v_min, cfg.v_max)
    else:
        vr = cfg.v
    try:
        table = functionals.region_scan(phys, om, vr, (cfg.steps, cfg.v_steps))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg.out:
        functionals.write_region_csv(table, cfg.out)
        _write_manifest_for(cfg.out, cfg)
        _line(out, "rows", int(table["omega"].shape[0]))
        _line(out, "certified", int(table["stable"].sum()))
    else:
        functionals.write_region_csv(table, out)
    return 0


def _integrator(cfg):
    try:
        return IntegratorConfig(dt=cfg.dt, scheme=cfg.scheme, record_every=cfg.record_every)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_evolve(cfg, out):
    prof = _profile(cfg)
    icfg = _integrator(cfg)
    state, log = run(init_state(prof), prof.phys, icfg, cfg.t_end)
    drift = conservation_drift(log)
    for key, val in zip(("drift_E", "drift_Q1", "drift_Q2"), drift):
        _line(out, key, val)
    _line(out, "t", state.t)
    if cfg.out:
        write_snapshot(state, cfg.out)
        write_manifest(str(cfg.out) + ".manifest.json", prof.phys, prof.grid, icfg, seed=cfg.seed,
                       config=cfg.echo(), conservation=log.as_array(), drift=list(drift))
    return 0


def cmd_orbit(cfg, out):
    prof = _profile(cfg)
    res = stationary_residual(prof)
    if abs(prof.phys.gamma - res.gamma_star) > 1e-12 * max(1.0, abs(res.gamma_star)):
        raise DomainError(f"gamma = {prof.phys.gamma:.17g} is inconsistent with the wave "
                          f"(gamma* = {res.gamma_star:.17g}); pass --derive-gamma")
    icfg = _integrator(cfg)
    spec = orbit.PerturbSpec(kind=cfg.perturbation, size=cfg.size, seed=cfg.seed)
    rep = orbit.stability_experiment(prof.phys, prof.wave, spec, cfg.t_end, icfg, profile=prof)
    _line(out, "perturbation_size", rep.perturbation_size)
    _line(out, "max_distance", rep.max_distance)
    _line(out, "ratio", rep.max_distance / rep.perturbation_size if rep.perturbation_size > 0 else float("nan"))
    print(f"region_criterion: {'certified stable' if rep.certified_region else 'not certified'}", file=out)
    if cfg.out:
        if str(cfg.out).endswith(".csv"):
            rep.write_csv(cfg.out)
            _write_manifest_for(cfg.out, cfg)
        else:
            rep.write_json(cfg.out, **_manifest(cfg))
    return 0


_DISPATCH = {
    "wave": cmd_wave,
    "residual": cmd_residual,
    "spectrum": cmd_spectrum,
    "hessian": cmd_hessian,
    "region": cmd_region,
    "evolve": cmd_evolve,
    "orbit": cmd_orbit,
}


def dispatch(cfg: RunConfig, out=None, err=None) -> int:
    """Run one command; 0 on success, 1 on numerical failure, 2 on bad usage."""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        return _DISPATCH[cfg.command](cfg, out)
    except (DomainError, BlowupDetected) as exc:
        print(f"error: {exc}", file=err)
        return 1
    except ValueError as exc:
        # UsageError and invalid parameter values (alpha <= 0, bad grid size, ...)
        print(f"usage error: {exc}", file=err)
        return 2


def main(argv=None, out=None, err=None) -> int:
    err = err or sys.stderr
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return 2
    return dispatch(cfg, out, err)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
