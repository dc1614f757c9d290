"""This file contains the entrypoint to the rest of the code.

Usage: python code/main.py {radial,optimize,eigen,mesh} [flags]

Flag values are resolved as defaults < --config file < explicit flags and
validated into a RunConfig before any computation.
"""

import argparse
import logging
import os
import sys
from dataclasses import asdict, dataclass, fields

from eigen import DEFAULT_MAX_ITER, DEFAULT_TOL, dirichlet_eigenpair
from errors import NumericalError, ContinuationError, ValidationError
from export import (DEFAULT_SAMPLES, read_triangle_field, write_json, write_node_field,
                    write_profile_csv, write_triangle_field)
from mesh import domain_mesh, save_mesh
from optimize import (DEFAULT_P_VALUES, ContinuationSchedule, continuation_solve,
                      relative_l1_distance, support_violation)
from pretty_print import print_eigen, print_optimize, print_radial, redtext
from radial import interpolate_theta, smooth_fit_residual, solve_radial, solve_radial_for_mass

MAIN_DIR = os.path.relpath(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))) # relative path of the main directory
EXPERIMENTS_DIR = os.path.join(MAIN_DIR, "experiments") # relative path of experiments dir

COMMANDS = ("radial", "optimize", "eigen", "mesh")


def _schedule(value):
    if isinstance(value, str):
        return ContinuationSchedule.parse(value).p_values
    return tuple(float(v) for v in value)


def _optional_str(value):
    return None if value in (None, "", "none", "None") else str(value)


@dataclass(frozen=True)
class RunConfig:
    """Resolved parameters of one command-line run."""
    command: str
    lambda1: float = 10.0
    m: float = 5.0
    mass_L: float = 0.424242
    domain: str = "disk"
    refinement: int = 32
    width: float = 1.0
    height: float = 1.0
    p_schedule: tuple = DEFAULT_P_VALUES
    tol: float = 1e-6
    max_iter: int = 200
    damping: float = 0.5
    eig_tol: float = DEFAULT_TOL
    eig_max_iter: int = DEFAULT_MAX_ITER
    theta: str = None
    samples: int = DEFAULT_SAMPLES
    out: str = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError("Unknown command %r" % self.command)
        if not self.m > 0:
            raise ValidationError("Stiffness m must be positive, got %r" % self.m)
        if not self.mass_L >= 0:
            raise ValidationError("Mass L must be nonnegative, got %r" % self.mass_L)
        if not self.lambda1 > 0:
            raise ValidationError("Eigenvalue must be positive, got %r" % self.lambda1)
        if self.refinement < 1:
            raise ValidationError("Refinement must be >= 1, got %r" % self.refinement)
        if not (self.width > 0 and self.height > 0):
            raise ValidationError("Rectangle sides must be positive, got %r x %r" % (self.width, self.height))
        if not (self.domain in ("disk", "rect") or self.domain.startswith("file:")):
            raise ValidationError("Unknown domain %r (expected disk, rect or file:PATH)" % self.domain)
        if not (self.tol > 0 and self.eig_tol > 0):
            raise ValidationError("Tolerances must be positive, got tol=%r eig_tol=%r" % (self.tol, self.eig_tol))
        if self.max_iter < 1 or self.eig_max_iter < 1:
            raise ValidationError("Iteration limits must be >= 1, got max_iter=%r eig_max_iter=%r"
                                  % (self.max_iter, self.eig_max_iter))
        if self.samples < 2:
            raise ValidationError("Number of samples must be >= 2, got %r" % self.samples)
        # raises on an invalid schedule or damping
        self.schedule()
        if self.out is None:
            object.__setattr__(self, "out", os.path.join(EXPERIMENTS_DIR, self.command))

    def schedule(self):
        return ContinuationSchedule(self.p_schedule, self.tol, self.max_iter, self.damping)

    def to_dict(self, include_paths=True):
        d = asdict(self)
        d["p_schedule"] = list(self.p_schedule)
        if not include_paths:
            del d["out"]
        return d


_CONVERTERS = dict(lambda1=float, m=float, mass_L=float, domain=str, refinement=int, width=float,
                   height=float, p_schedule=_schedule, tol=float, max_iter=int, damping=float,
                   eig_tol=float, eig_max_iter=int, theta=_optional_str, samples=int, out=str)
_KEY_ALIASES = {"lambda": "lambda1"}


def _normalize_key(key):
    key = key.strip().lstrip("-").replace("-", "_")
    return _KEY_ALIASES.get(key, key)


def read_config_file(path):
    """Parses a flat key=value file; '#' starts a comment. Returns {field: raw string}."""
    if not os.path.exists(path):
        raise ValidationError("Config file %s does not exist" % path)
    values = {}
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError("%s:%i: expected key=value, found %r" % (path, lineno, line))
            key, value = line.split("=", 1)
            name = _normalize_key(key)
            if name not in _CONVERTERS:
                raise ValidationError("%s:%i: unknown key %r" % (path, lineno, key.strip()))
            values[name] = value.strip()
    return values


def resolve_config(command, flags, config_path=None):
    """Merges defaults, the config file and explicit flags into a validated RunConfig."""
    raw = {}
    if config_path:
        raw.update(read_config_file(config_path))
    raw.update(flags)
    known = set(f.name for f in fields(RunConfig))
    kwargs = {}
    for name, value in raw.items():
        if name not in known:
            raise ValidationError("Unknown option %r" % name)
        try:
            kwargs[name] = _CONVERTERS[name](value)
        except ValidationError:
            raise
        except ValueError:
            raise ValidationError("Could not parse %s = %r" % (name, value))
    return RunConfig(command, **kwargs)


class UsageParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, "%s: error: %s\n" % (self.prog, message))


def build_parser():
    # every option defaults to SUPPRESS so that only explicit flags override the config file
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="Path to a key=value config file. Explicit flags override it.")
    common.add_argument("--out", help="Output directory. Defaults to experiments/<command>")
    common.add_argument("--lambda", dest="lambda1", type=float, help="Prescribed eigenvalue for the radial solution (> j00^2). Default 10")
    common.add_argument("--m", type=float, help="Stiffness coefficient of the reinforcement. Default 5")
    common.add_argument("--mass-L", dest="mass_L", type=float, help="Available reinforcement mass L. Default 0.424242")
    common.add_argument("--domain", help="disk, rect or file:PATH. Default disk")
    common.add_argument("--refinement", type=int, help="Mesh refinement: rings of the disk, cells per unit length of the rectangle. Default 32")
    common.add_argument("--width", type=float, help="Rectangle width. Default 1")
    common.add_argument("--height", type=float, help="Rectangle height. Default 1")
    common.add_argument("--p-schedule", dest="p_schedule", help="Comma separated decreasing exponents > 1. Default 3,2,1.5,1.25,1.1,1.05")
    common.add_argument("--tol", type=float, help="Fixed-point tolerance on the L1 change of theta. Default 1e-6")
    common.add_argument("--max-iter", dest="max_iter", type=int, help="Fixed-point iterations per stage. Default 200")
    common.add_argument("--damping", type=float, help="Relaxation factor in (0, 1]. Default 0.5")
    common.add_argument("--eig-tol", dest="eig_tol", type=float, help="Eigen residual tolerance. Default 1e-10")
    common.add_argument("--eig-max-iter", dest="eig_max_iter", type=int, help="Inverse iteration limit. Default 500")
    common.add_argument("--theta", help="Density CSV (tri,x,y,value) for the eigen command. Default theta = 0")
    common.add_argument("--samples", type=int, help="Rows of the radial profile CSV. Default 512")

    parser = UsageParser(description="Optimal reinforcement of a membrane for its first Dirichlet eigenvalue")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("radial", parents=[common], help="Exact optimum on the unit disk for a given eigenvalue")
    sub.add_parser("optimize", parents=[common], help="p-continuation optimizer on a mesh")
    sub.add_parser("eigen", parents=[common], help="First eigenpair for a given density")
    sub.add_parser("mesh", parents=[common], help="Write the mesh of a domain")
    return parser


def _prepare_out_dir(cfg):
    try:
        os.makedirs(cfg.out, exist_ok=True)
        write_json(os.path.join(cfg.out, "config.json"), cfg.to_dict())
    except OSError as e:
        raise ValidationError("Cannot write to output directory %s: %s" % (cfg.out, e))


def cmd_radial(cfg):
    opt = solve_radial(cfg.lambda1, cfg.m)
    residual = smooth_fit_residual(opt.a_bar, opt.lambda1)
    write_profile_csv(os.path.join(cfg.out, "profile.csv"), opt, cfg.samples)
    write_json(os.path.join(cfg.out, "radial.json"), dict(
        config=cfg.to_dict(include_paths=False),
        result=dict(lambda1=opt.lambda1, m=opt.m, a_bar=opt.a_bar, L=opt.mass_L, r_peak=opt.r_peak,
                    c0=opt.c0, c1=opt.c1, smooth_fit_residual=residual,
                    rayleigh_argmin=opt.rayleigh_argmin),
        fields=dict(profile="profile.csv")))
    print_radial(opt, residual)
    return 0


def cmd_eigen(cfg):
    mesh = domain_mesh(cfg.domain, cfg.refinement, cfg.width, cfg.height)
    theta = read_triangle_field(cfg.theta, mesh) if cfg.theta else None
    pair = dirichlet_eigenpair(mesh, theta, cfg.m, cfg.eig_tol, cfg.eig_max_iter)
    write_node_field(os.path.join(cfg.out, "eigenfunction.csv"), mesh, pair.u, name="u")
    write_json(os.path.join(cfg.out, "eigen.json"), dict(
        config=cfg.to_dict(include_paths=False),
        result=dict(lambda1=pair.lambda1, residual=pair.residual, iterations=pair.iterations,
                    converged=pair.converged, nodes=mesh.num_nodes, triangles=mesh.num_triangles),
        fields=dict(u="eigenfunction.csv")))
    print_eigen(pair, mesh)
    return 0


def disk_oracle(mesh, theta, m, L):
    """Analytic optimum for the same (m, L) and the relative L1 distance of theta to it."""
    opt = solve_radial_for_mass(m, L)
    reference = interpolate_theta(mesh, opt)
    return dict(lambda1=opt.lambda1, a_bar=opt.a_bar, theta_l1_error=relative_l1_distance(theta, reference))


def cmd_optimize(cfg):
    mesh = domain_mesh(cfg.domain, cfg.refinement, cfg.width, cfg.height)
    report_path = os.path.join(cfg.out, "optimize.json")
    try:
        report = continuation_solve(mesh, cfg.m, cfg.mass_L, cfg.schedule(), cfg.eig_tol, cfg.eig_max_iter,
                                    progress=True)
    except ContinuationError as e:
        partial = e.report.to_dict()
        partial.update(config=cfg.to_dict(include_paths=False), error=str(e))
        write_json(report_path, partial)
        raise

    write_triangle_field(os.path.join(cfg.out, "theta.csv"), report.theta)
    write_node_field(os.path.join(cfg.out, "u.csv"), mesh, report.pair.u)
    result = report.to_dict()
    result["final"]["support_violation"] = support_violation(report.theta, report.pair, 0.1, L=cfg.mass_L)
    result.update(config=cfg.to_dict(include_paths=False), fields=dict(theta="theta.csv", u="u.csv"))
    oracle = None
    if cfg.domain == "disk" and cfg.mass_L > 0:
        try:
            oracle = disk_oracle(mesh, report.theta, cfg.m, cfg.mass_L)
            result["oracle"] = oracle
        except ValidationError as e:
            logging.warning("No analytic reference for this run: %s", e)
    write_json(report_path, result)
    print_optimize(report, oracle)
    return 0


def cmd_mesh(cfg):
    mesh = domain_mesh(cfg.domain, cfg.refinement, cfg.width, cfg.height)
    save_mesh(mesh, os.path.join(cfg.out, "mesh.txt"))
    print("%i nodes, %i triangles, h = %.15g, min angle = %.15g degrees"
          % (mesh.num_nodes, mesh.num_triangles, mesh.h, mesh.min_angle()))
    return 0


_DISPATCH = dict(radial=cmd_radial, optimize=cmd_optimize, eigen=cmd_eigen, mesh=cmd_mesh)


def main(argv=None):
    logging.basicConfig(level=logging.INFO)

    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code

    flags = vars(args)
    command = flags.pop("command")
    config_path = flags.pop("config", None)

    file_handler = None
    try:
        cfg = resolve_config(command, flags, config_path)
        _prepare_out_dir(cfg)
        file_handler = logging.FileHandler(os.path.join(cfg.out, "log.txt"))
        logging.getLogger().addHandler(file_handler)
        return _DISPATCH[command](cfg)
    except ValidationError as e:
        sys.stderr.write(redtext("ERROR: %s" % e) + "\n")
        return 1
    except NumericalError as e:
        sys.stderr.write(redtext("NUMERICAL FAILURE: %s" % e) + "\n")
        return 2
    except OSError as e:
        sys.stderr.write(redtext("ERROR: %s" % e) + "\n")
        return 1
    finally:
        if file_handler is not None:
            logging.getLogger().removeHandler(file_handler)
            file_handler.close()


if __name__ == "__main__":
    sys.exit(main())
