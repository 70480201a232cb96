"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line PASS/FAIL verdict with the measured numbers;
the lines are printed in the terminal summary (see conftest.py) and when
the module is run directly.
"""

import filecmp
import time
from pathlib import Path

import numpy as np
import pytest

from anisoeq import cli, seeds, transforms, verify
from anisoeq.fields import VectorField, constant, coordinate
from anisoeq.freefunc import AbPair, FreeFunction as F
from anisoeq.sampling import SampleSet
from anisoeq.states import (
    AnisotropicState,
    FlowingIsotropicState,
    StaticIsotropicState,
    VacuumState,
)
from helpers import random_polynomial, random_solenoidal, random_vector

pytestmark = [
    pytest.mark.acceptance,
    pytest.mark.filterwarnings("ignore::anisoeq.errors.PhysicalityWarning"),
]

SAMPLES = SampleSet()  # 10^4 scrambled Halton points on the unit cube
H = 1e-3
FD_TOL, ANALYTIC_TOL = 1e-5, 1e-7
CONFIGS = Path(__file__).resolve().parent.parent / "configs"
VERDICTS: dict = {}

x, y, z = coordinate(0), coordinate(1), coordinate(2)


def record(n, title, ok, detail):
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    VERDICTS[n] = line
    print(line)
    assert ok, line


def amhd(state, mode="fd", h=H):
    return verify.residual_amhd(state, SAMPLES, mode=mode, h=h).linf


def max_rel_diff(a, b, names=("B", "V", "rho", "tau", "p_perp")):
    pts = SAMPLES.points()
    fa, fb = a.fields(), b.fields()
    worst = 0.0
    for n in names:
        va, vb = fa[n](pts), fb[n](pts)
        worst = max(worst, float(np.max(np.abs(va - vb)) / max(1.0, float(np.max(np.abs(va))))))
    return worst


def flow_seed():
    return seeds.make_field_aligned_flow(1.0, 1.0, F.identity(), 1.0, 1.0)


def embedded(name):
    if name == "theta_pinch":
        return seeds.embed_as_anisotropic(seeds.make_theta_pinch())
    return seeds.embed_as_anisotropic(seeds.make_force_free_helical(1.0, 2.0), F.polynomial([1.0, 0.0, 1.0]))


def catalog():
    return {name: seeds.build_seed(name) for name in sorted(seeds.SEEDS)}


def test_criterion_01_seed_self_verification():
    rows, ok = [], True
    for name, st in catalog().items():
        an = verify.verify_state(st, SAMPLES, mode="analytic").linf
        fd = verify.verify_state(st, SAMPLES, h=H).linf
        ok &= an <= ANALYTIC_TOL and fd <= FD_TOL
        rows.append(f"{name} {an:.1e}/{fd:.1e}")
    record(1, "seed self-verification (analytic/fd)", ok, ", ".join(rows))


def test_criterion_02_flow_rescale_pipeline():
    s = flow_seed()
    f, g = F.exp(), F.polynomial([1.0, 1.0])
    out = transforms.rescale_flowing(s, f, g, C0=2.0, C1=0.0)
    rep = verify.residual_amhd(out, SAMPLES, h=H)
    vals = {
        "system": rep.linf,
        "div_B1": rep.equations["div_B"].linf,
        "curl(V1xB1)": rep.equations["induction"].linf,
        "B1xcurlB1": verify.check_rescaled_field_identity(s.B, f, s.psi, SAMPLES, h=H).linf,
        "V1xcurlV1": verify.check_rescaled_field_identity(s.V, g, s.psi, SAMPLES, h=H).linf,
    }
    ok = all(v <= FD_TOL for v in vals.values())
    record(2, "flow rescale pipeline and intermediate identities", ok,
           ", ".join(f"{k} {v:.1e}" for k, v in vals.items()))


def test_criterion_03_flow_rescale_spot_values():
    s = flow_seed()
    pts = SAMPLES.points()
    tau = transforms.rescale_flowing(s, F.constant(2.0), F.constant(1.0), C0=1.0).tau(pts)
    exact = bool(np.all(tau == 0.75))
    ident = transforms.rescale_flowing(s, F.constant(1.0), F.constant(1.0), C0=1.0, C1=0.0)
    iso_as_aniso = AnisotropicState(B=s.B, p_perp=s.P, tau=constant(0.0), V=s.V, density=s.rho, psi=s.psi)
    diff = max_rel_diff(iso_as_aniso, ident)
    record(3, "flow rescale spot values", exact and diff <= 1e-15,
           f"tau == 0.75 everywhere: {exact}; identity parameters max rel diff {diff:.1e}")


def test_criterion_04_static_rescale():
    theta = transforms.rescale_static(seeds.make_theta_pinch(), F.polynomial([1.0, 0.0, 1.0]), C0=2.0, C1=1.0)
    abc = transforms.rescale_static(seeds.make_abc_beltrami(), F.constant(3.0), C0=1.0, C1=0.0)
    r1, r2 = amhd(theta), amhd(abc)
    record(4, "static rescale (theta pinch, ABC)", r1 <= FD_TOL and r2 <= FD_TOL,
           f"theta pinch {r1:.1e}, ABC {r2:.1e}")


def test_criterion_05_vacuum_rescale():
    s = seeds.make_vacuum_planar_harmonic("exp-trig", Bz0=1.0)
    out = transforms.rescale_vacuum(s, F.sin(offset=2.0), C0=1.0, C1=5.0)
    r = amhd(out)
    record(5, "vacuum rescale of exp(x)cos(y) potential field", r <= FD_TOL, f"residual {r:.1e}")


def test_criterion_06_symmetry_group():
    parts, ok = [], True
    base = embedded("theta_pinch")
    ident = transforms.symmetry_transform(base, AbPair.identity(), F.constant(1.0), F.constant(1.0), 1)
    d = max_rel_diff(base, ident)
    ok &= d <= 1e-15
    parts.append(f"identity {d:.1e}")

    hyp = AbPair(F.cosh(), F.sinh(), 1.0)
    worst = 0.0
    for name in ("theta_pinch", "helical"):
        for sign in (1, -1):
            worst = max(worst, amhd(transforms.symmetry_transform(embedded(name), hyp, sign=sign)))
    ok &= worst <= FD_TOL
    parts.append(f"hyperbolic both signs {worst:.1e}")

    first = transforms.symmetry_transform(embedded("helical"), hyp, F.polynomial([1.0, 0.0, 1.0]))
    second = transforms.symmetry_transform(first, AbPair(F.cosh(), F.sinh(amplitude=-1.0), 1.0))
    r = amhd(second)
    ok &= r <= FD_TOL
    parts.append(f"composition {r:.1e}")

    worst = 0.0
    for name in ("theta_pinch", "helical"):
        for sign in (1, -1):
            src = embedded(name)
            m, n = F.polynomial([1.0, 0.0, 1.0]), F.exp(rate=0.3)
            out = transforms.symmetry_transform(src, hyp, m, n, sign)
            back = transforms.symmetry_transform(out, *transforms.inverse_parameters(hyp, m, n, sign))
            worst = max(worst, max_rel_diff(src, back))
    ok &= worst <= 1e-12
    parts.append(f"inverse round trip {worst:.1e}")
    record(6, "symmetry transform group properties", ok, ", ".join(parts))


def test_criterion_07_structural_identities():
    worst_am = 0.0
    for name in ("theta_pinch", "helical"):
        src = embedded(name)
        for sign in (1, -1):
            ab = AbPair.hyperbolic(C=1.7, rate=0.9)
            out = transforms.symmetry_transform(src, ab, F.polynomial([1.0, 0.0, 1.0]), F.exp(rate=0.2), sign)
            worst_am = max(worst_am, verify.check_helper_invariant(src, out, ab.C, SAMPLES).linf)

    rng = np.random.default_rng(20020101)
    worst_curl = 0.0
    for _ in range(100):
        f, a = random_polynomial(rng, offset=1.0), random_vector(rng)
        worst_curl = max(worst_curl, verify.check_rescaled_curl_identity(f, a, SAMPLES, h=H).linf)
    worst_div = 0.0
    for _ in range(100):
        B = random_solenoidal(rng)
        pp, pl = random_polynomial(rng, offset=1.0), random_polynomial(rng, offset=1.5)
        worst_div = max(worst_div, verify.check_pressure_divergence_identity(pp, pl, B, SAMPLES, h=H).linf)
    ok = worst_am <= 1e-12 and worst_curl <= 1e-4 and worst_div <= 1e-4
    record(7, "structural identities", ok,
           f"helper invariant {worst_am:.1e}, rescaled curl (100 trials) {worst_curl:.1e}, "
           f"tensor divergence (100 trials) {worst_div:.1e}")


def test_criterion_08_convergence_order():
    rows, ok = [], True
    for name, st in catalog().items():
        coarse = verify.verify_state(st, SAMPLES, h=H).linf
        fine = verify.verify_state(st, SAMPLES, h=H / 2).linf
        ratio = coarse / fine
        ok &= 3.0 <= ratio <= 5.0
        rows.append(f"{name} {ratio:.3f}")
    record(8, "FD convergence ratio on halving h", ok, ", ".join(rows))


def _negative_controls():
    bump = 0.1 * F.sin()(x + 2.0 * y + 3.0 * z)
    dvec = VectorField.from_components(bump, 0.0, 0.0)
    out = {}

    s = flow_seed()
    out["mhd"] = verify.residual_mhd(
        FlowingIsotropicState(B=s.B + dvec, V=s.V, rho=s.rho, P=s.P, psi=s.psi), SAMPLES, h=H).linf
    th = seeds.make_theta_pinch()
    out["plasma"] = verify.residual_plasma(
        StaticIsotropicState(B=th.B, p=th.p + bump, psi=th.psi), SAMPLES, h=H).linf
    hel = seeds.make_force_free_helical(1.0, 2.0)
    out["force_free"] = verify.residual_force_free(
        StaticIsotropicState(B=hel.B + dvec, p=hel.p, alpha=hel.alpha), SAMPLES, h=H).linf
    vac = seeds.make_vacuum_planar_harmonic("exp-trig", Bz0=1.0)
    out["vacuum"] = verify.residual_vacuum(VacuumState(B=vac.B + dvec), SAMPLES, h=H).linf
    an = transforms.symmetry_transform(embedded("helical"), AbPair(F.cosh(), F.sinh(), 1.0))
    out["amhd"] = verify.residual_amhd(
        AnisotropicState(B=an.B, p_perp=an.p_perp + bump, tau=an.tau, V=an.V, density=an.density,
                         psi=an.psi), SAMPLES, h=H).linf
    out["surface"] = verify.check_surface(hel, SAMPLES, h=H, psi=z + bump).linf
    B = hel.B
    out["tensor_divergence"] = verify.check_pressure_divergence_identity(
        1.0 + z, 2.0 + z, B + dvec * (x * x), SAMPLES, h=H).linf
    perturbed = transforms.symmetry_transform(embedded("theta_pinch"), AbPair.hyperbolic(rate=0.5))
    # perturb along B so the squared field changes at first order
    along = VectorField.from_components(0.0, 0.0, bump)
    bad = AnisotropicState(B=perturbed.B + along, p_perp=perturbed.p_perp, tau=perturbed.tau,
                           V=perturbed.V, density=perturbed.density, psi=perturbed.psi)
    out["helper_invariant"] = verify.check_helper_invariant(embedded("theta_pinch"), bad, 1.0, SAMPLES).linf
    wrong_psi = verify.check_surface(hel, SAMPLES, h=H, psi=x).linf
    return out, wrong_psi


def test_criterion_09_negative_controls():
    out, wrong_psi = _negative_controls()
    ok = all(v >= 1e-2 for v in out.values()) and wrong_psi >= 0.5
    record(9, "negative controls", ok,
           ", ".join(f"{k} {v:.2g}" for k, v in out.items()) + f", wrong psi {wrong_psi:.2g}")


def test_criterion_10_determinism(tmp_path, capsys):
    mismatches, codes = [], []
    for config in sorted(CONFIGS.glob("*.yaml")):
        dirs = [tmp_path / config.stem / str(k) for k in range(2)]
        for d in dirs:
            codes.append(cli.main(["run", str(config), "--out-dir", str(d)]))
        names = sorted(p.name for p in dirs[0].iterdir())
        if names != sorted(p.name for p in dirs[1].iterdir()):
            mismatches.append(config.stem)
            continue
        _, bad, err = filecmp.cmpfiles(dirs[0], dirs[1], names, shallow=False)
        mismatches += [f"{config.stem}/{n}" for n in bad + err]
    capsys.readouterr()
    ok = not mismatches and all(c == 0 for c in codes)
    record(10, "byte-identical repeated runs of shipped configs", ok,
           f"{len(codes) // 2} configs, exit codes {sorted(set(codes))}, mismatches {mismatches or 'none'}")


if __name__ == "__main__":
    import sys

    code = pytest.main([__file__, "-q", "-p", "no:cacheprovider"])
    sys.exit(code)
