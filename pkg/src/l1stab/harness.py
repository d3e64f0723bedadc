"""Random instances and the per-trial experiment pipeline."""

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import bounds, l0, rsp
from .l1solver import (assemble_theta, construct_dual_witness, solve_l1, stack_u,
                       theta_residual, top_k_pattern)
from .polytope import build_p0, gap_proxy
from .problem import ProblemData, best_k_term_error, validate

REPORT_VERSION = 1

# the first 14 columns are the documented report; the rest are extra diagnostics
CSV_COLUMNS = [
    "trial", "rsp_holds", "theta_residual", "value_l1", "k_min_l0", "err_l2",
    "sigma_k", "term_eps_upsilon", "term_phi", "term_Bxb", "margin_eq12",
    "margin_eq14", "margin_eq17", "margin_eq19",
    "margin_eq10", "eq7_residual", "eps_prime_proxy", "sigma_est", "bound_rhs",
]


class GenerationCapExceeded(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    trials: int = 20
    n: int = 8
    m: int = 6
    l: int = 0
    h: int = 0  # 0 means h = m
    k: int = 1
    epsilon: float = 0.0
    weights: tuple = (1.0, 0.0, 0.0)
    facets: int = 16
    seed: int = 0
    norms: tuple = (1.0, 1.0, 1.0)  # (c, d, dhat)
    robinson_samples: int = 3
    require_certified: bool = False
    max_attempts: int = 50
    run_oracle: bool = True

    def __post_init__(self):
        self.weights = tuple(float(w) for w in self.weights)
        self.norms = tuple(float(v) for v in self.norms)
        if self.h == 0:
            self.h = self.m
        if len(self.weights) != 3 or len(self.norms) != 3:
            raise ValueError("weights and norms need three entries each")
        if self.n > 40:
            raise ValueError("n is capped at 40")
        if not 0 <= self.k <= self.n:
            raise ValueError("k must lie in [0, n]")
        if self.m + self.l > self.n:
            raise ValueError("need m + l <= n so that [A; B] can have full row rank")
        if self.h < self.m:
            raise ValueError("need h >= m")

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {', '.join(sorted(extra))}")
        return cls(**d)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class Instance:
    problem: ProblemData
    x0: np.ndarray


@dataclass
class TrialRecord:
    trial: int
    rsp_holds: bool
    theta_residual: float
    value_l1: float
    k_min_l0: float
    err_l2: float
    sigma_k: float
    term_eps_upsilon: float
    term_phi: float
    term_Bxb: float
    margin_eq12: float = math.nan
    margin_eq14: float = math.nan
    margin_eq17: float = math.nan
    margin_eq19: float = math.nan
    margin_eq10: float = math.nan
    eq7_residual: float = math.nan
    eps_prime_proxy: float = math.nan
    sigma_est: float = math.nan
    bound_rhs: float = math.nan

    def row(self):
        d = asdict(self)
        return [_fmt(d[c]) for c in CSV_COLUMNS]

    def margins(self):
        return {k: getattr(self, "margin_" + k) for k in ("eq12", "eq14", "eq17", "eq19", "eq10")}


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def planted_vector(rng, n, k):
    x = np.zeros(n)
    S = rng.choice(n, size=k, replace=False)
    x[S] = rng.choice([-1.0, 1.0], size=k) * rng.uniform(0.5, 2.0, size=k)
    return x


def generate_instance(cfg, rng):
    """Gaussian A, U, B; y = A x0 + r with r rescaled so the constraint value at
    x0 is 0.9 * epsilon; b leaves x0 strictly inside the side constraints."""
    n, m, l, h = cfg.n, cfg.m, cfg.l, cfg.h
    for _ in range(cfg.max_attempts):
        A = rng.standard_normal((m, n))
        U = rng.standard_normal((m, h))
        B = rng.standard_normal((l, n))
        x0 = planted_vector(rng, n, cfg.k)
        r = rng.standard_normal(m)
        y = A @ x0
        b = B @ x0 + rng.uniform(0.0, 1.0, size=l)
        probe = ProblemData(A=A, U=U, y=y + r, epsilon=cfg.epsilon, a=cfg.weights, B=B, b=b)
        cv = probe.constraint_value(x0)
        if cfg.epsilon > 0 and cv > 0:
            y = y + r * (0.9 * cfg.epsilon / cv)
        p = ProblemData(A=A, U=U, y=y, epsilon=cfg.epsilon, a=cfg.weights, B=B, b=b)
        if validate(p):
            continue
        return Instance(p, x0)
    raise GenerationCapExceeded("could not draw a valid instance")


def _certify(p, k):
    return rsp.certify_restricted(p.A, p.B, k) if p.l else rsp.certify_weak(p.A, k)


def draw_trial_instance(cfg, trial):
    rng = np.random.default_rng([cfg.seed, trial])
    for _ in range(cfg.max_attempts):
        inst = generate_instance(cfg, rng)
        cert = _certify(inst.problem, cfg.k)
        if cert.holds or not cfg.require_certified:
            return inst, cert
    raise GenerationCapExceeded(f"trial {trial}: no certified instance after "
                                f"{cfg.max_attempts} draws")


def witness_for(p, x, k):
    """RSP witness for the sign pattern of x's k largest entries, or None."""
    J1, J2 = top_k_pattern(x, k)
    return rsp.find_witness(p.A, p.B, J1, J2)


def run_trial(cfg, trial):
    inst, cert = draw_trial_instance(cfg, trial)
    p, x0 = inst.problem, inst.x0
    P = build_p0(p.m, cfg.facets, seed=cfg.seed)
    primal, dual, value = solve_l1(p, P)
    T = assemble_theta(p, P)
    _, theta_res = theta_residual(T, stack_u(primal, dual))

    k_min = math.nan
    if cfg.run_oracle and p.n <= l0.MAX_N:
        k_min = l0.solve_l0(p, P, cfg.k).k_min

    c, d, dhat = cfg.norms
    const = bounds.compute_constants(p, c, d, dhat)
    if cfg.robinson_samples > 0:
        const.sigma_est = bounds.estimate_robinson(T, cfg.robinson_samples, seed=trial)
    gap, _ = gap_proxy(P, seed=cfg.seed)
    eps_prime = bounds.eps_prime_proxy(p, gap)
    rhs = bounds.bound_rhs(p, x0, cfg.k, const, eps_prime, feasible=True)

    rec = TrialRecord(
        trial=trial, rsp_holds=cert.holds, theta_residual=theta_res, value_l1=value,
        k_min_l0=k_min, err_l2=float(np.linalg.norm(x0 - primal.x)),
        sigma_k=best_k_term_error(x0, cfg.k), term_eps_upsilon=rhs.terms["eps_upsilon"],
        term_phi=rhs.terms["phi"], term_Bxb=rhs.terms["Bxb"],
        eps_prime_proxy=eps_prime, sigma_est=const.sigma_est, bound_rhs=rhs.total)
    if cert.holds:
        wit = witness_for(p, x0, cfg.k)
        dw = construct_dual_witness(p, P, x0, cfg.k, wit.eta, wit.nu, wit.h)
        mg = bounds.proof_step_margins(p, P, x0, cfg.k, dw, wit.eta, wit.h, const)
        rec.margin_eq12, rec.margin_eq14 = mg["eq12"], mg["eq14"]
        rec.margin_eq17, rec.margin_eq19 = mg["eq17"], mg["eq19"]
        rec.margin_eq10, rec.eq7_residual = mg["eq10"], mg["eq7"]
    return rec


def _run_one(args):
    cfg, trial = args
    return run_trial(cfg, trial)


def run_experiment(cfg, workers=1):
    """Records in trial order regardless of how many workers ran them."""
    jobs = [(cfg, t) for t in range(cfg.trials)]
    if workers <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


def records_to_csv(records):
    buf = io.StringIO()
    buf.write(f"# l1stab experiment report v{REPORT_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in records:
        w.writerow(rec.row())
    return buf.getvalue()
