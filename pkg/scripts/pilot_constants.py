"""Pilot runs behind the frozen values in kacpp/constants.py.

Usage: python scripts/pilot_constants.py [section ...]
Sections: G, cov, joint, eig, defect, badarc, flat. Prints one line per quantity.
"""
import math
import sys
import time

import numpy as np

from kacpp.field import KacPolynomial, check_event_G
from kacpp.gauss import covariance_joint, covariance_single, decorrelation_defect, min_eigenvalue_diagnostic, sigma0
from kacpp.grid import bad_arc_fraction, build_grid
from kacpp.sampler import CoefficientLaw, SeedSpec, draw_coefficients

SEED = 20240101


def pilot_G(n=1024, M=500):
    law = CoefficientLaw("gaussian")
    ok, worst = 0, 0.0
    for m in range(M):
        r = check_event_G(KacPolynomial(draw_coefficients(law, n, SeedSpec(SEED, m))))
        ok += r.passed
        worst = max(worst, r.worst_ratio)
    print(f"G n={n} M={M}: passed {ok}, worst ratio {worst:.4f}")


def pilot_cov(n=4096, eps=0.5):
    ts = np.linspace(n ** (-1 + eps), math.pi - n ** (-1 + eps), 20001)
    dev = max(np.abs(covariance_single(t, n) - sigma0()).max() for t in ts)
    print(f"cov n={n} eps={eps}: max dev {dev:.5f}, C = dev*n^eps = {dev * n**eps:.4f}")


def pilot_joint(n=4096, a=0.5):
    worst = 0.0
    for t in np.linspace(0.1, math.pi - 0.1 - 2 * n ** (-a), 2001):
        S = covariance_joint([t, t + n ** (-a)], n)
        worst = max(worst, np.abs(S[:4, 4:]).max())
    print(f"joint n={n} a={a}: max off-block {worst:.5f}, C = {worst * n**a:.4f}")


def pilot_eig(n=4096):
    gs = np.geomspace(0.05, 1.0, 15)
    lam = [min_eigenvalue_diagnostic([1.0, 1.0 + g / n], n) for g in gs]
    slope = np.polyfit(np.log(gs), np.log(lam), 1)[0]
    print(f"eig n={n} k=2: log-log slope {slope:.3f}, lam_min(Sigma0)={np.linalg.eigvalsh(sigma0()).min():.5f}")


def pilot_defect(n=4096, a2=0.6, count=1_000_000):
    # unit boxes [-1,1]^4 sit in B(0, 2) = B(0, n^a1)
    box = np.array([[-1, 1]] * 4, dtype=float)
    a1 = math.log(2) / math.log(n)
    for label, ts in (("n^0.6-spread", [1.0, 1.0 + n ** (a2 - 1)]), ("gamma=0.5", [1.0, 1.0 + 0.5 / n])):
        d = decorrelation_defect(ts, [box, box], n, count, SeedSpec(SEED, 0))
        print(f"defect n={n} {label}: {d.defect:.5f} +- {d.std_error:.5f} (joint {d.joint:.5f}, "
              f"product {d.product:.5f}), defect / n^(2a1-a2) = {d.defect / n ** (2 * a1 - a2):.3f}")
    d1 = decorrelation_defect([1.0], [box], n, count, SeedSpec(SEED, 0))
    print(f"defect k=1: {d1.defect:.5f} +- {d1.std_error:.5f}")


def pilot_badarc(kappa=0.1):
    for n in (2048, 8192):
        g = build_grid(n, 2.0, kappa, 4)
        f = bad_arc_fraction(g)
        print(f"badarc n={n} N={g.N}: fraction {f:.5f}, C = f / n^(2k-1) = {f / n ** (2 * kappa - 1):.3f}")


def pilot_flat():
    from kacpp.experiments import ExperimentConfig, run
    for n in (512, 1024, 2048):
        t0 = time.time()
        cfg = ExperimentConfig(kind="mu-nu-compare", n=n, M=1000, N_override="desk", master_seed=SEED + 7)
        res, _ = run(cfg, keep_trials=False)
        a = res.aggregates
        print(f"flat n={n}: mu {a['mu_flat_rate']:.4f} nu {a['nu_flat_rate']:.4f} "
              f"agreement {a['agreement_rate']:.4f} ({time.time() - t0:.0f}s)")


SECTIONS = {"G": pilot_G, "cov": pilot_cov, "joint": pilot_joint, "eig": pilot_eig,
            "defect": pilot_defect, "badarc": pilot_badarc, "flat": pilot_flat}

if __name__ == "__main__":
    for name in sys.argv[1:] or list(SECTIONS):
        SECTIONS[name]()
