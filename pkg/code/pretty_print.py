"""This file contains functions to pretty-print solver results"""

from colorama import Fore, Style

# See here for more colorama formatting options:
# https://pypi.python.org/pypi/colorama


def yellowtext(s):
    """Yellow text"""
    return Fore.YELLOW + Style.BRIGHT + s + Style.RESET_ALL + Fore.RESET

def greentext(s):
    """Green text"""
    return Fore.GREEN + Style.BRIGHT + s + Style.RESET_ALL + Fore.RESET

def redtext(s):
    """Red text"""
    return Fore.RED + Style.BRIGHT + s + Style.RESET_ALL + Fore.RESET


def _line(label, value):
    if isinstance(value, float):
        value = "%.15g" % value
    return "{:>22}: {}".format(label, value)


def print_radial(opt, residual):
    """
    Print the radial optimum.

    Inputs:
      opt: RadialOptimum
      residual: smooth-fit residual at opt.a_bar
    """
    print(yellowtext(_line("LAMBDA1", opt.lambda1)))
    print(yellowtext(_line("M", opt.m)))
    print(greentext(_line("A_BAR", opt.a_bar)))
    print(greentext(_line("L", opt.mass_L)))
    print(greentext(_line("R_PEAK", opt.r_peak)))
    print(yellowtext(_line("SMOOTH-FIT RESIDUAL", residual)))
    print(yellowtext(_line("RAYLEIGH ARGMIN", opt.rayleigh_argmin)))


def print_eigen(pair, mesh):
    text = greentext if pair.converged else redtext
    print(yellowtext(_line("NODES", mesh.num_nodes)))
    print(yellowtext(_line("TRIANGLES", mesh.num_triangles)))
    print(text(_line("LAMBDA1", pair.lambda1)))
    print(text(_line("RESIDUAL", pair.residual)))
    print(yellowtext(_line("ITERATIONS", pair.iterations)))


def print_optimize(report, oracle=None):
    """
    Print the continuation trace and the certified result.

    Inputs:
      report: ContinuationReport
      oracle: optional dict with the analytic disk values (lambda1, a_bar, theta_l1_error)
    """
    print(yellowtext("{:>8} {:>6} {:>20} {:>20} {:>12} {:>12}".format(
        "p", "iters", "lambda1", "bound", "gap", "linf gap")))
    for s in report.stages:
        text = yellowtext if s.converged else redtext
        print(text("{:>8.4g} {:>6d} {:>20.15g} {:>20.15g} {:>12.4e} {:>12.4e}".format(
            s.p, s.iterations, s.lambda1, s.upper_bound, s.gap, s.linf_gap)))
    gap_ok = report.duality_gap >= -1e-9
    print(greentext(_line("LAMBDA1", report.lambda1)))
    print(greentext(_line("UPPER BOUND", report.upper_bound)))
    print((greentext if gap_ok else redtext)(_line("GAP", report.duality_gap)))
    print(yellowtext(_line("GRADIENT RATIO", report.gradient_norm_ratio)))
    if oracle is not None:
        print(yellowtext(_line("ANALYTIC LAMBDA1", oracle["lambda1"])))
        print(yellowtext(_line("ANALYTIC A_BAR", oracle["a_bar"])))
        print(yellowtext(_line("THETA L1 ERROR", oracle["theta_l1_error"])))
