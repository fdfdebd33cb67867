"""End-to-end experiment drivers behind the CLI subcommands.

``run_integral_experiment`` reproduces the integral-equation study at
desk scale: exact-data BCD vs Landweber over a fixed cycle budget, and
noisy-data runs with and without the loping/discrepancy safeguards.
``run_ct_experiment`` runs the multi-spectral CT pipeline on the
surrogate phantom, with and without noise.  Both emit one CSV trace
per run plus a manifest; given the same configuration (seed included)
the outputs are byte-identical.
"""

import os

import numpy as np

from ..operators import IntegrationOperator, TensorProductOperator, operator_norm
from ..solvers import (
    AdaptiveStep,
    ConstantStep,
    Control,
    StopRule,
    run_landweber,
    run_loping_bcd,
)
from ..tomo import (
    FanBeamGeometry,
    FanBeamProjector,
    MultiSpectralOperator,
    head_phantom,
    run_nonlinear,
    two_material_model,
    write_pgm,
)
from ..trace import emit_csv
from .config import config_hash
from .phantoms import add_noise, make_integral_phantom
from .rng import PortableRng

# Empirically tuned constant steps for the desk-scale CT model; the
# stability limit depends on the surrogate spectrum and attenuation
# (divergence sets in near step 4 on the default geometry).
_CT_STEP_BCD = 2.0
_CT_STEP_LW = 2.0


def _write_manifest(outdir, cfg, names):
    path = os.path.join(outdir, "manifest.txt")
    with open(path, "w", newline="\n") as fh:
        fh.write(f"config_hash = {config_hash(cfg)}\n")
        for name in sorted(names):
            fh.write(name + "\n")
    return path


def build_integral_problem(cfg):
    """Operator, phantom, exact and noisy data for the integral benchmark."""
    V = cfg.mixing_matrix()
    op = TensorProductOperator(V, IntegrationOperator(cfg.p))
    f_star = make_integral_phantom(cfg.p)
    y = op.apply(f_star)
    y_delta, delta, delta_b = add_noise(y, cfg.noise_std, cfg.seed, V)
    return op, f_star, y, y_delta, delta, delta_b


def _step_rule(cfg, op):
    gamma_min = cfg.effective_gamma_min()
    if cfg.step_rule == "adaptive":
        return AdaptiveStep(theta=cfg.theta, gamma_min=gamma_min)
    if cfg.step_rule != "constant":
        raise ValueError(f"unknown step rule {cfg.step_rule!r}")
    if cfg.step_size > 0:
        return ConstantStep(cfg.step_size, gamma_min=gamma_min)
    return ConstantStep.for_operator(op, tau=cfg.tau, gamma_min=gamma_min)


def run_integral_experiment(cfg, outdir):
    """Run all six integral-equation traces and write them to ``outdir``."""
    os.makedirs(outdir, exist_ok=True)
    if cfg.control != "cyclic":
        raise ValueError(f"unsupported control {cfg.control!r}")
    op, f_star, y, y_delta, delta, delta_b = build_integral_problem(cfg)
    B = op.n_blocks
    control = Control.cyclic(B)
    steps = _step_rule(cfg, op)
    lw_step = steps.value if isinstance(steps, ConstantStep) else (
        cfg.step_size if cfg.step_size > 0
        else ConstantStep.for_operator(op, tau=cfg.tau).value
    )
    x0 = np.zeros_like(f_star)
    budget = cfg.cycles * B

    runs = {}
    runs["bcd_exact"] = run_loping_bcd(
        op, x0, y, control, steps,
        StopRule(tau=cfg.tau, delta=0.0, window=B, max_iter=budget),
        reference=f_star,
    )
    runs["landweber_exact"] = run_landweber(
        op, x0, y, lw_step, cfg.cycles, reference=f_star,
    )
    runs["bcd_loping_noisy"] = run_loping_bcd(
        op, x0, y_delta, control, steps,
        StopRule(tau=cfg.tau, delta=delta_b, window=B, max_iter=cfg.max_iter),
        reference=f_star,
    )
    runs["bcd_plain_noisy"] = run_loping_bcd(
        op, x0, y_delta, control, steps,
        StopRule(tau=cfg.tau, delta=0.0, window=B, max_iter=budget),
        reference=f_star,
    )
    runs["landweber_discrepancy_noisy"] = run_landweber(
        op, x0, y_delta, lw_step, cfg.max_iter,
        tau=cfg.tau, delta=delta, reference=f_star,
    )
    runs["landweber_plain_noisy"] = run_landweber(
        op, x0, y_delta, lw_step, cfg.cycles, reference=f_star,
    )

    names = []
    for name, state in runs.items():
        fname = name + ".csv"
        emit_csv(state.trace, os.path.join(outdir, fname))
        names.append(fname)
    manifest = _write_manifest(outdir, cfg, names)
    return {
        "runs": runs,
        "operator": op,
        "phantom": f_star,
        "data": y,
        "noisy_data": y_delta,
        "delta": delta,
        "delta_b": delta_b,
        "manifest": manifest,
    }


def build_ct_problem(cfg):
    """Projector, spectral model, phantom and data for the CT benchmark."""
    geom = FanBeamGeometry(
        n=cfg.grid_n,
        n_src=cfg.n_src,
        n_ang=cfg.n_ang,
        n_samp=cfg.n_samp,
        fan_half_angle=cfg.fan_half_angle,
        ray_length=cfg.ray_length,
        support_radius=cfg.support_radius,
    )
    projector = FanBeamProjector(geom)
    attenuation_files = None
    if cfg.attenuation_file:
        attenuation_files = cfg.attenuation_file.split(",")
    model = two_material_model(
        n_energies=cfg.n_energies,
        e_min=cfg.e_min,
        e_max=cfg.e_max,
        window_split=cfg.window_split,
        precond=cfg.precond_matrix(),
        attenuation_files=attenuation_files,
        spectrum_file=cfg.spectrum_file or None,
    )
    system = MultiSpectralOperator(model, projector)
    phantom = head_phantom(cfg.grid_n, support_radius=cfg.support_radius)
    v = system.preconditioned(phantom)
    noise_std = cfg.noise_frac * float(np.max(np.abs(v)))
    v_noisy = v + noise_std * PortableRng(cfg.seed).normal(v.shape)
    return system, phantom, v, v_noisy, noise_std


def run_ct_experiment(cfg, outdir):
    """Run the four CT reconstructions and write traces and image dumps."""
    os.makedirs(outdir, exist_ok=True)
    system, phantom, v, v_noisy, noise_std = build_ct_problem(cfg)
    step_bcd = cfg.step_bcd if cfg.step_bcd > 0 else _CT_STEP_BCD
    step_lw = cfg.step_lw if cfg.step_lw > 0 else _CT_STEP_LW

    runs = {
        "ct_bcd_exact": run_nonlinear(
            system, v, method="bcd", step_size=step_bcd,
            n_cycles=cfg.cycles_exact, reference=phantom,
        ),
        "ct_landweber_exact": run_nonlinear(
            system, v, method="landweber", step_size=step_lw,
            n_cycles=cfg.cycles_exact, reference=phantom,
        ),
        "ct_bcd_noisy": run_nonlinear(
            system, v_noisy, method="bcd", step_size=step_bcd,
            n_cycles=cfg.cycles_noisy, reference=phantom,
        ),
        "ct_landweber_noisy": run_nonlinear(
            system, v_noisy, method="landweber", step_size=step_lw,
            n_cycles=cfg.cycles_noisy, reference=phantom,
        ),
    }

    names = []
    material = ("brain", "bone")
    for m in range(phantom.shape[0]):
        fname = f"phantom_{material[m]}.pgm"
        write_pgm(os.path.join(outdir, fname), phantom[m])
        names.append(fname)
    for name, state in runs.items():
        fname = name + ".csv"
        emit_csv(state.trace, os.path.join(outdir, fname))
        names.append(fname)
        for m in range(state.x.shape[0]):
            iname = f"{name}_{material[m]}.pgm"
            write_pgm(os.path.join(outdir, iname), state.x[m])
            names.append(iname)
    manifest = _write_manifest(outdir, cfg, names)
    return {
        "runs": runs,
        "system": system,
        "phantom": phantom,
        "data": v,
        "noisy_data": v_noisy,
        "noise_std": noise_std,
        "manifest": manifest,
    }
